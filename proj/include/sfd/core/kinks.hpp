#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

// Piecewise operations (relu, abs, max, the phase branch cut) report which
// side of their non-differentiable points each input falls on. A finite
// difference whose two evaluations disagree here straddles a kink and does
// not estimate the derivative.
namespace sfd::kinks {

struct Trace {
  std::vector<std::uint64_t> signatures;  // one per piecewise op call
};

/// Routes signatures on this thread into `trace` for the scope's lifetime.
class TraceScope {
 public:
  explicit TraceScope(Trace& trace);
  ~TraceScope();
  TraceScope(const TraceScope&) = delete;
  TraceScope& operator=(const TraceScope&) = delete;

 private:
  Trace* previous_;
};

Trace* active_trace();

/// side(i) returns a small integer naming the linear piece of element i.
template <class Side>
void record(std::size_t n, Side side) {
  Trace* t = active_trace();
  if (!t) return;
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<std::uint64_t>(side(i)) + 1;
    h *= 1099511628211ull;
  }
  t->signatures.push_back(h);
}

}  // namespace sfd::kinks
