#include "sfd/core/kinks.hpp"

namespace sfd::kinks {
namespace {
thread_local Trace* current = nullptr;
}

TraceScope::TraceScope(Trace& trace) : previous_(current) { current = &trace; }
TraceScope::~TraceScope() { current = previous_; }

Trace* active_trace() { return current; }

}  // namespace sfd::kinks
