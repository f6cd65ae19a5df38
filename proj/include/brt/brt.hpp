#pragma once

// Broken-ray tomography toolkit: forward simulation of V-line transforms of
// disc-supported images and reconstruction by angular harmonic decomposition
// with truncated-SVD regularization.

#include "brt/errors.hpp"
#include "brt/fft.hpp"
#include "brt/forward.hpp"
#include "brt/geometry.hpp"
#include "brt/harmonics.hpp"
#include "brt/io.hpp"
#include "brt/kernels.hpp"
#include "brt/parallel.hpp"
#include "brt/phantoms.hpp"
#include "brt/pipeline.hpp"
#include "brt/system.hpp"
