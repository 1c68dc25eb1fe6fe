#pragma once

namespace embscore {

// Runs one embscore command. Returns 0 when a complete output was written,
// 2 when inputs or flags fail validation, 1 on any other failure.
int RunCli(int argc, char** argv);

}  // namespace embscore
