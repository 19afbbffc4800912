#include "nsopt/subprocess.hpp"

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "nsopt/errors.hpp"

namespace nsopt {

namespace {

struct Pipe {
    int fds[2] = {-1, -1};
    Pipe() {
        if (pipe(fds) != 0) fail(Errc::io_error, std::string("pipe: ") + std::strerror(errno));
    }
    ~Pipe() {
        close_read();
        close_write();
    }
    void close_read() {
        if (fds[0] >= 0) close(fds[0]);
        fds[0] = -1;
    }
    void close_write() {
        if (fds[1] >= 0) close(fds[1]);
        fds[1] = -1;
    }
};

void drain_ready(int fd, std::string& sink, bool& open) {
    char buf[4096];
    for (;;) {
        ssize_t n = read(fd, buf, sizeof buf);
        if (n > 0) {
            sink.append(buf, static_cast<std::size_t>(n));
            continue;
        }
        if (n == 0) open = false;
        if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) open = false;
        return;
    }
}

} // namespace

CommandResult run_command(const std::string& command, const std::string& workdir, double timeout_s) {
    Pipe out_pipe, err_pipe;
    pid_t pid = fork();
    if (pid < 0) fail(Errc::io_error, std::string("fork: ") + std::strerror(errno));
    if (pid == 0) {
        // Child. Own process group so a timeout can kill the whole tree.
        setpgid(0, 0);
        if (!workdir.empty() && chdir(workdir.c_str()) != 0) _exit(127);
        dup2(out_pipe.fds[1], STDOUT_FILENO);
        dup2(err_pipe.fds[1], STDERR_FILENO);
        out_pipe.close_read();
        out_pipe.close_write();
        err_pipe.close_read();
        err_pipe.close_write();
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    setpgid(pid, pid); // also from the parent side, to close the race
    out_pipe.close_write();
    err_pipe.close_write();
    fcntl(out_pipe.fds[0], F_SETFL, O_NONBLOCK);
    fcntl(err_pipe.fds[0], F_SETFL, O_NONBLOCK);

    CommandResult result;
    bool out_open = true, err_open = true;
    auto deadline = std::chrono::steady_clock::now() +
                    std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                        std::chrono::duration<double>(timeout_s > 0 ? timeout_s : 0));
    bool killed = false;
    while (out_open || err_open) {
        struct pollfd fds[2];
        nfds_t nfds = 0;
        if (out_open) fds[nfds++] = {out_pipe.fds[0], POLLIN, 0};
        if (err_open) fds[nfds++] = {err_pipe.fds[0], POLLIN, 0};
        int wait_ms = 200;
        if (timeout_s > 0 && !killed) {
            auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                            deadline - std::chrono::steady_clock::now())
                            .count();
            if (left <= 0) {
                kill(-pid, SIGKILL);
                killed = true;
                result.timed_out = true;
            } else if (left < wait_ms) {
                wait_ms = static_cast<int>(left);
            }
        }
        int rc = poll(fds, nfds, wait_ms);
        if (rc < 0) {
            if (errno == EINTR) continue;
            break;
        }
        nfds_t k = 0;
        if (out_open) {
            if (fds[k].revents & (POLLIN | POLLHUP | POLLERR | POLLNVAL))
                drain_ready(out_pipe.fds[0], result.out, out_open);
            ++k;
        }
        if (err_open) {
            if (fds[k].revents & (POLLIN | POLLHUP | POLLERR | POLLNVAL))
                drain_ready(err_pipe.fds[0], result.err, err_open);
            ++k;
        }
    }

    int status = 0;
    while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (WIFEXITED(status))
        result.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status))
        result.exit_code = -WTERMSIG(status);
    return result;
}

} // namespace nsopt
