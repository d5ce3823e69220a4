#pragma once

#include "jgroup.hpp"
#include "numerics.hpp"
#include "schwartz.hpp"
#include "quantization.hpp"
#include "starproduct.hpp"
#include "starexp.hpp"
#include "fourier.hpp"
#include "bstorus.hpp"
#include "verify.hpp"
