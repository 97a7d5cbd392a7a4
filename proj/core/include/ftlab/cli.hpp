#pragma once

namespace ftlab {

// Exit codes: 0 success, 1 usage or config error, 2 unresolved numerical condition,
// 3 exceptional-time refusal, 4 a study check failed.
enum ExitCode : int { kExitOk = 0, kExitParse = 1, kExitUnresolved = 2, kExitExceptional = 3, kExitCheck = 4 };

int run_cli(int argc, char** argv);

}  // namespace ftlab
