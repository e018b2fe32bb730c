#pragma once

#include "hypolab/errors.hpp"
#include "hypolab/numerics.hpp"
#include "hypolab/moduli.hpp"
#include "hypolab/symbol_classes.hpp"
#include "hypolab/zygmund.hpp"
#include "hypolab/coefficients.hpp"
#include "hypolab/hyperbolic_symbol.hpp"
#include "hypolab/energy_lab.hpp"
#include "hypolab/config.hpp"
