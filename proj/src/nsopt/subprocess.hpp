#pragma once

#include <string>

namespace nsopt {

struct CommandResult {
    int exit_code = -1;     // -(signal) when killed by a signal
    bool timed_out = false; // killed after exceeding the deadline
    std::string out;        // captured stdout
    std::string err;        // captured stderr
};

// Runs `command` through /bin/sh -c in `workdir`, capturing both streams.
// A non-positive timeout means no deadline. On timeout the whole process
// group is killed and timed_out is set. Throws IOError only when the child
// cannot be started at all; a failing command is reported via exit_code.
CommandResult run_command(const std::string& command, const std::string& workdir, double timeout_s);

} // namespace nsopt
