#pragma once

#include "birchmax/analytic.hpp"
#include "birchmax/ccdf.hpp"
#include "birchmax/engine.hpp"
#include "birchmax/errors.hpp"
#include "birchmax/fft.hpp"
#include "birchmax/field.hpp"
#include "birchmax/io.hpp"
#include "birchmax/moments.hpp"
#include "birchmax/parallel.hpp"
#include "birchmax/quadrature.hpp"
#include "birchmax/run_config.hpp"
#include "birchmax/sato_tate.hpp"
