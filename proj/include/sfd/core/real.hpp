#pragma once

namespace sfd {

// Storage type of every tensor. The library ships as f32; a second build
// with SFD_REAL_DOUBLE backs the finite-difference gradient checks, whose
// step is too small to resolve in single precision.
#ifdef SFD_REAL_DOUBLE
using Real = double;
#else
using Real = float;
#endif

}  // namespace sfd
