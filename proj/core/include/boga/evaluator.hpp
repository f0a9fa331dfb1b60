#pragma once

#include "boga/seqcore.hpp"

#include <chrono>
#include <string>
#include <vector>

namespace boga {

struct EvalOutcome {
    enum class Status { ok, timeout, protocol_error, non_finite };

    Status status = Status::ok;
    double score = 0.0;
    std::string message;

    bool is_ok() const { return status == Status::ok; }
};

const char* to_string(EvalOutcome::Status status);

/// Client side of the external-evaluator wire protocol: line-delimited JSON
/// over the child's standard input/output.
///
///   handshake (child -> engine):  {"protocol": "boga-eval", "version": 1}
///   request   (engine -> child):  {"id": <uint64>, "sequence": "<string>"}
///   response  (child -> engine):  {"id": <uint64>, "score": <finite float>}
///
/// Responses may arrive in any order; they are matched by id. Child stderr
/// is logged verbatim and ignored for protocol purposes. Up to n_jobs
/// requests are kept in flight.
class SubprocessEvaluator {
  public:
    SubprocessEvaluator(std::vector<std::string> command, int n_jobs,
                        std::chrono::milliseconds timeout);
    ~SubprocessEvaluator();

    SubprocessEvaluator(const SubprocessEvaluator&) = delete;
    SubprocessEvaluator& operator=(const SubprocessEvaluator&) = delete;

    /// Spawn the child and wait for the handshake line. Throws
    /// EvaluatorLostError (spawn failure, early exit) or
    /// EvaluatorProtocolError (bad handshake).
    void launch();

    bool alive() const;

    /// One outcome per input sequence, in request order. Individual
    /// failures (timeout, malformed or non-finite response) are reported in
    /// the outcome; losing the child entirely throws EvaluatorLostError.
    std::vector<EvalOutcome> evaluate_batch(const std::vector<Sequence>& batch);

    void shutdown();

    std::chrono::milliseconds timeout() const { return timeout_; }

  private:
    struct Pending;
    void dispatch(std::uint64_t id, const std::string& sequence);
    void handle_stdout_line(const std::string& line, std::vector<Pending>& pending,
                            std::vector<EvalOutcome>& outcomes);

    std::vector<std::string> command_;
    int n_jobs_;
    std::chrono::milliseconds timeout_;

    int pid_ = -1;
    int child_stdin_ = -1;
    int child_stdout_ = -1;
    int child_stderr_ = -1;
    bool launched_ = false;
    bool alive_ = false;
    bool stderr_eof_ = false;
    std::uint64_t next_id_ = 1;
    std::string stdout_buffer_;
    std::string stderr_buffer_;
};

/// Strict form of batch evaluation: throws EvaluatorTimeoutError,
/// EvaluatorProtocolError or NonFiniteScoreError on the first failed
/// sequence; otherwise returns one finite score per input, in order.
std::vector<double> evaluate_external(const std::vector<Sequence>& batch,
                                      SubprocessEvaluator& adapter);

} // namespace boga
