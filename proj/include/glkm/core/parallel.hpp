#pragma once

namespace glkm {

/// Compute backend for the numeric kernels. `serial` is the plain nested-loop
/// reference kept for testing; `parallel` is the OpenMP production path.
enum class Backend { serial, parallel };

Backend default_backend();
void set_default_backend(Backend b);

int hardware_threads();

} // namespace glkm
