#pragma once

namespace wsckit {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitScorer = 3;

// Entry point of the `wsckit` tool. Never throws; failures map to the exit
// codes above with a message on stderr.
int run(int argc, const char* const* argv);

}  // namespace wsckit
