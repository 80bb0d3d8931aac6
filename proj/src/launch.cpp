#include "pario/launch.hpp"

#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstring>
#include <map>
#include <string>
#include <vector>

#include "pario/coordinator.hpp"
#include "pario/types.hpp"

namespace pario {

namespace {

struct Child {
    pid_t pid = -1;
    int out_fd = -1;
    std::string pending;  // partial line buffer
};

void flush_line(int rank, std::string& line, bool prefix) {
    if (prefix) {
        std::fprintf(stdout, "[rank %d] %s\n", rank, line.c_str());
    } else {
        std::fprintf(stdout, "%s\n", line.c_str());
    }
    std::fflush(stdout);
    line.clear();
}

}  // namespace

int run_spmd(const LaunchSpec& spec) {
    if (spec.np < 1) {
        std::fprintf(stderr, "pario-run: process count must be >= 1\n");
        return 2;
    }
    if (spec.argv.empty()) {
        std::fprintf(stderr, "pario-run: no program given\n");
        return 2;
    }

    Coordinator coordinator(spec.np, spec.coord_host, spec.coord_port);
    const std::string endpoint = coordinator.endpoint();

    std::vector<Child> children(spec.np);
    for (int rank = 0; rank < spec.np; ++rank) {
        int pipefd[2];
        if (::pipe(pipefd) != 0) {
            std::perror("pipe");
            return 2;
        }
        pid_t pid = ::fork();
        if (pid < 0) {
            std::perror("fork");
            return 2;
        }
        if (pid == 0) {
            // child: combined stdout+stderr onto the pipe
            ::close(pipefd[0]);
            ::dup2(pipefd[1], STDOUT_FILENO);
            ::dup2(pipefd[1], STDERR_FILENO);
            ::close(pipefd[1]);
            if (!spec.workdir.empty() && ::chdir(spec.workdir.c_str()) != 0) {
                std::perror("chdir");
                ::_exit(127);
            }
            ::setenv("PARIO_RANK", std::to_string(rank).c_str(), 1);
            ::setenv("PARIO_SIZE", std::to_string(spec.np).c_str(), 1);
            ::setenv("PARIO_COORD", endpoint.c_str(), 1);
            std::vector<char*> argv;
            argv.reserve(spec.argv.size() + 1);
            for (const auto& a : spec.argv) argv.push_back(const_cast<char*>(a.c_str()));
            argv.push_back(nullptr);
            ::execvp(argv[0], argv.data());
            std::fprintf(stderr, "exec %s: %s\n", argv[0], std::strerror(errno));
            ::_exit(127);
        }
        ::close(pipefd[1]);
        children[rank].pid = pid;
        children[rank].out_fd = pipefd[0];
    }

    // Pump child output until every pipe closes.
    int open_pipes = spec.np;
    std::vector<pollfd> fds(spec.np);
    while (open_pipes > 0) {
        for (int i = 0; i < spec.np; ++i) {
            fds[i].fd = children[i].out_fd;
            fds[i].events = POLLIN;
            fds[i].revents = 0;
        }
        if (::poll(fds.data(), fds.size(), -1) < 0) {
            if (errno == EINTR) continue;
            std::perror("poll");
            break;
        }
        for (int i = 0; i < spec.np; ++i) {
            if (children[i].out_fd < 0 || !(fds[i].revents & (POLLIN | POLLHUP))) continue;
            char buf[4096];
            ssize_t n = ::read(children[i].out_fd, buf, sizeof(buf));
            if (n > 0) {
                for (ssize_t k = 0; k < n; ++k) {
                    if (buf[k] == '\n') {
                        flush_line(i, children[i].pending, spec.prefix_output);
                    } else {
                        children[i].pending.push_back(buf[k]);
                    }
                }
            } else {
                if (!children[i].pending.empty()) {
                    flush_line(i, children[i].pending, spec.prefix_output);
                }
                ::close(children[i].out_fd);
                children[i].out_fd = -1;
                --open_pipes;
            }
        }
    }

    int exit_code = 0;
    for (int i = 0; i < spec.np; ++i) {
        int status = 0;
        if (::waitpid(children[i].pid, &status, 0) < 0) {
            exit_code = exit_code ? exit_code : 2;
            continue;
        }
        int code = WIFEXITED(status) ? WEXITSTATUS(status)
                                     : 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 1);
        if (code != 0 && exit_code == 0) exit_code = code;
    }

    coordinator.stop();
    return exit_code;
}

}  // namespace pario
