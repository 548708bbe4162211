#pragma once

#include "expdeg/approx.hpp"
#include "expdeg/chebyshev.hpp"
#include "expdeg/coeffs.hpp"
#include "expdeg/core_math.hpp"
#include "expdeg/double_double.hpp"
#include "expdeg/errors.hpp"
#include "expdeg/hpreal.hpp"
#include "expdeg/kde.hpp"
#include "expdeg/kde_io.hpp"
#include "expdeg/multi_index.hpp"
#include "expdeg/poly_document.hpp"
#include "expdeg/remez.hpp"
