#include "boga/evaluator.hpp"

#include "boga/errors.hpp"
#include "boga/log.hpp"

#include <nlohmann/json.hpp>

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <thread>

namespace boga {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

const char* to_string(EvalOutcome::Status status) {
    switch (status) {
    case EvalOutcome::Status::ok: return "ok";
    case EvalOutcome::Status::timeout: return "timeout";
    case EvalOutcome::Status::protocol_error: return "protocol_error";
    case EvalOutcome::Status::non_finite: return "non_finite";
    }
    return "?";
}

namespace {

void close_fd(int& fd) {
    if (fd >= 0) {
        ::close(fd);
        fd = -1;
    }
}

// Drain whatever is readable without blocking; false on EOF.
bool drain_fd(int fd, std::string& buffer) {
    char chunk[4096];
    while (true) {
        const ssize_t n = ::read(fd, chunk, sizeof(chunk));
        if (n > 0) {
            buffer.append(chunk, static_cast<std::size_t>(n));
            if (n < static_cast<ssize_t>(sizeof(chunk))) return true;
            continue;
        }
        if (n == 0) return false;
        if (errno == EAGAIN || errno == EWOULDBLOCK) return true;
        if (errno == EINTR) continue;
        return false;
    }
}

// Pop complete lines off the front of the buffer.
std::vector<std::string> take_lines(std::string& buffer) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (true) {
        const std::size_t nl = buffer.find('\n', start);
        if (nl == std::string::npos) break;
        lines.push_back(buffer.substr(start, nl - start));
        start = nl + 1;
    }
    buffer.erase(0, start);
    return lines;
}

} // namespace

struct SubprocessEvaluator::Pending {
    std::uint64_t id = 0;
    std::size_t index = 0;
    std::string sequence;
    Clock::time_point deadline;
    bool dispatched = false;
    bool done = false;
};

SubprocessEvaluator::SubprocessEvaluator(std::vector<std::string> command, int n_jobs,
                                         std::chrono::milliseconds timeout)
    : command_(std::move(command)), n_jobs_(std::max(1, n_jobs)), timeout_(timeout) {
    if (command_.empty()) throw ConfigError("evaluator command must not be empty");
}

SubprocessEvaluator::~SubprocessEvaluator() {
    try {
        shutdown();
    } catch (...) {
    }
}

bool SubprocessEvaluator::alive() const { return alive_; }

void SubprocessEvaluator::launch() {
    if (launched_) return;

    int in_pipe[2], out_pipe[2], err_pipe[2];
    if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0 || ::pipe(err_pipe) != 0)
        throw EvaluatorLostError("pipe() failed: " + std::string(std::strerror(errno)));

    const int pid = ::fork();
    if (pid < 0) throw EvaluatorLostError("fork() failed: " + std::string(std::strerror(errno)));

    if (pid == 0) {
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::dup2(err_pipe[1], STDERR_FILENO);
        for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]})
            ::close(fd);
        std::vector<char*> argv;
        argv.reserve(command_.size() + 1);
        for (auto& arg : command_) argv.push_back(arg.data());
        argv.push_back(nullptr);
        ::execvp(argv[0], argv.data());
        ::_exit(127);
    }

    pid_ = pid;
    child_stdin_ = in_pipe[1];
    child_stdout_ = out_pipe[0];
    child_stderr_ = err_pipe[0];
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    ::close(err_pipe[1]);
    launched_ = true;
    alive_ = true;

    // Handshake: first stdout line, within the configured timeout.
    const auto deadline = Clock::now() + timeout_;
    while (stdout_buffer_.find('\n') == std::string::npos) {
        const auto now = Clock::now();
        if (now >= deadline) {
            shutdown();
            throw EvaluatorLostError("evaluator did not complete the handshake in time");
        }
        struct pollfd fds[2] = {{child_stdout_, POLLIN, 0},
                                {stderr_eof_ ? -1 : child_stderr_, POLLIN, 0}};
        const int wait_ms = static_cast<int>(
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count());
        const int rc = ::poll(fds, 2, std::max(1, wait_ms));
        if (rc < 0 && errno != EINTR) {
            shutdown();
            throw EvaluatorLostError("poll() failed during handshake");
        }
        if (fds[1].revents & (POLLIN | POLLHUP)) {
            if (!drain_fd(child_stderr_, stderr_buffer_)) stderr_eof_ = true;
            for (const auto& line : take_lines(stderr_buffer_)) log::info("evaluator: " + line);
        }
        if (fds[0].revents & (POLLIN | POLLHUP)) {
            if (!drain_fd(child_stdout_, stdout_buffer_) &&
                stdout_buffer_.find('\n') == std::string::npos) {
                shutdown();
                throw EvaluatorLostError("evaluator exited before the handshake");
            }
        }
    }

    const auto lines = take_lines(stdout_buffer_);
    const std::string& hs = lines.front();
    try {
        const json j = json::parse(hs);
        if (j.at("protocol").get<std::string>() != "boga-eval" || j.at("version").get<int>() != 1)
            throw EvaluatorProtocolError("unsupported evaluator handshake: " + hs);
    } catch (const json::exception&) {
        shutdown();
        throw EvaluatorProtocolError("malformed evaluator handshake: " + hs);
    }
    // Any extra lines before the first request are protocol noise.
    for (std::size_t i = 1; i < lines.size(); ++i)
        log::warn("evaluator: unexpected pre-request line ignored: " + lines[i]);
}

void SubprocessEvaluator::shutdown() {
    close_fd(child_stdin_);
    if (pid_ > 0) {
        int status = 0;
        for (int i = 0; i < 200; ++i) {
            const int rc = ::waitpid(pid_, &status, WNOHANG);
            if (rc != 0) {
                pid_ = -1;
                break;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
        }
        if (pid_ > 0) {
            ::kill(pid_, SIGKILL);
            ::waitpid(pid_, &status, 0);
            pid_ = -1;
        }
    }
    close_fd(child_stdout_);
    close_fd(child_stderr_);
    alive_ = false;
}

void SubprocessEvaluator::dispatch(std::uint64_t id, const std::string& sequence) {
    json req;
    req["id"] = id;
    req["sequence"] = sequence;
    std::string line = req.dump();
    line.push_back('\n');
    std::size_t written = 0;
    while (written < line.size()) {
        const ssize_t n = ::write(child_stdin_, line.data() + written, line.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            alive_ = false;
            throw EvaluatorLostError("write to evaluator failed: " +
                                     std::string(std::strerror(errno)));
        }
        written += static_cast<std::size_t>(n);
    }
}

void SubprocessEvaluator::handle_stdout_line(const std::string& line,
                                             std::vector<Pending>& pending,
                                             std::vector<EvalOutcome>& outcomes) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception&) {
        log::warn("evaluator: unparseable response line ignored: " + line);
        return;
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_number_unsigned()) {
        log::warn("evaluator: response without a valid id ignored: " + line);
        return;
    }
    const std::uint64_t id = j["id"].get<std::uint64_t>();
    auto it = std::find_if(pending.begin(), pending.end(), [&](const Pending& p) {
        return p.id == id && p.dispatched && !p.done;
    });
    if (it == pending.end()) {
        log::warn("evaluator: response for unknown or finished id " + std::to_string(id));
        return;
    }

    EvalOutcome& out = outcomes[it->index];
    if (!j.contains("score") || !j["score"].is_number()) {
        out.status = EvalOutcome::Status::protocol_error;
        out.message = "malformed response: " + line;
    } else {
        const double score = j["score"].get<double>();
        if (!std::isfinite(score)) {
            out.status = EvalOutcome::Status::non_finite;
            out.message = "non-finite score";
        } else {
            out.status = EvalOutcome::Status::ok;
            out.score = score;
        }
    }
    it->done = true;
}

std::vector<EvalOutcome> SubprocessEvaluator::evaluate_batch(const std::vector<Sequence>& batch) {
    if (!launched_) launch();
    if (!alive_) throw EvaluatorLostError("evaluator process is not running");
    if (batch.empty()) return {};

    std::vector<EvalOutcome> outcomes(batch.size());
    std::vector<Pending> pending(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        pending[i].id = next_id_++;
        pending[i].index = i;
        pending[i].sequence = batch[i].str();
    }

    std::size_t next_to_send = 0;
    std::size_t in_flight = 0;
    std::size_t open = batch.size();

    auto send_more = [&] {
        while (next_to_send < pending.size() && in_flight < static_cast<std::size_t>(n_jobs_)) {
            Pending& p = pending[next_to_send++];
            dispatch(p.id, p.sequence);
            p.dispatched = true;
            p.deadline = Clock::now() + timeout_;
            ++in_flight;
        }
    };

    auto settle = [&](Pending& p, EvalOutcome::Status status, const std::string& message) {
        outcomes[p.index].status = status;
        outcomes[p.index].message = message;
        p.done = true;
    };

    send_more();
    while (open > 0) {
        // Expire overdue requests.
        const auto now = Clock::now();
        Clock::time_point next_deadline = Clock::time_point::max();
        for (auto& p : pending) {
            if (!p.dispatched || p.done) continue;
            if (p.deadline <= now) {
                settle(p, EvalOutcome::Status::timeout, "no response within timeout");
                --in_flight;
                --open;
            } else {
                next_deadline = std::min(next_deadline, p.deadline);
            }
        }
        // A settled slot frees budget for the next request.
        send_more();
        for (auto& p : pending)
            if (p.dispatched && !p.done) next_deadline = std::min(next_deadline, p.deadline);
        open = 0;
        for (const auto& p : pending)
            if (!p.done) ++open;
        if (open == 0) break;

        struct pollfd fds[2] = {{child_stdout_, POLLIN, 0},
                                {stderr_eof_ ? -1 : child_stderr_, POLLIN, 0}};
        int wait_ms = 50;
        if (next_deadline != Clock::time_point::max()) {
            wait_ms = static_cast<int>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                           next_deadline - Clock::now())
                                           .count());
            wait_ms = std::clamp(wait_ms, 1, 1000);
        }
        const int rc = ::poll(fds, 2, wait_ms);
        if (rc < 0) {
            if (errno == EINTR) continue;
            alive_ = false;
            throw EvaluatorLostError("poll() on evaluator pipes failed");
        }

        if (fds[1].revents & (POLLIN | POLLHUP)) {
            if (!drain_fd(child_stderr_, stderr_buffer_)) stderr_eof_ = true;
            for (const auto& line : take_lines(stderr_buffer_)) log::info("evaluator: " + line);
        }
        if (fds[0].revents & (POLLIN | POLLHUP)) {
            const bool open_pipe = drain_fd(child_stdout_, stdout_buffer_);
            std::size_t done_before = 0;
            for (const auto& p : pending)
                if (p.done) ++done_before;
            for (const auto& line : take_lines(stdout_buffer_))
                handle_stdout_line(line, pending, outcomes);
            std::size_t done_after = 0;
            for (const auto& p : pending)
                if (p.done) ++done_after;
            in_flight -= done_after - done_before;
            open -= done_after - done_before;
            send_more();
            if (!open_pipe) {
                alive_ = false;
                if (open > 0)
                    throw EvaluatorLostError("evaluator closed its output with " +
                                             std::to_string(open) + " request(s) outstanding");
            }
        }
    }
    return outcomes;
}

std::vector<double> evaluate_external(const std::vector<Sequence>& batch,
                                      SubprocessEvaluator& adapter) {
    const auto outcomes = adapter.evaluate_batch(batch);
    std::vector<double> scores;
    scores.reserve(outcomes.size());
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        switch (outcomes[i].status) {
        case EvalOutcome::Status::ok:
            scores.push_back(outcomes[i].score);
            break;
        case EvalOutcome::Status::timeout:
            throw EvaluatorTimeoutError(batch[i].str());
        case EvalOutcome::Status::protocol_error:
            throw EvaluatorProtocolError(outcomes[i].message);
        case EvalOutcome::Status::non_finite:
            throw NonFiniteScoreError(batch[i].str());
        }
    }
    return scores;
}

} // namespace boga
