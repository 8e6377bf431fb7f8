#pragma once

// Everything except the live WebSocket endpoint (ws_server.hpp, needs Boost).

#include <iscore/bench.hpp>
#include <iscore/compiler.hpp>
#include <iscore/interpreter.hpp>
#include <iscore/oracle.hpp>
#include <iscore/runtime.hpp>
#include <iscore/score.hpp>
#include <iscore/store.hpp>
#include <iscore/trace.hpp>
#include <iscore/verifier.hpp>

namespace iscore {
inline constexpr const char* kVersion = "1.0.0";
}
