#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltlfbeam/concept_table.hpp"

namespace ltlfbeam {

using Prefix = std::vector<OutputId>;
/// One row of next-output log-probabilities per prefix. -inf is a hard zero.
using LogProbMatrix = std::vector<std::vector<double>>;

/// Next-output distribution p(x_t | x_<t) of an autoregressive model.
class Scorer {
 public:
  Scorer() = default;
  Scorer(const Scorer&) {}
  Scorer& operator=(const Scorer&) { return *this; }
  virtual ~Scorer() = default;
  virtual std::size_t vocab_size() const = 0;
  virtual LogProbMatrix score(const std::vector<Prefix>& prefixes) = 0;
  /// True if concurrent calls to score() are unsafe. Callers that share
  /// such a scorer lock call_mutex() around each call.
  virtual bool exclusive() const { return false; }
  std::mutex& call_mutex() { return mutex_; }

 private:
  std::mutex mutex_;
};

/// Throws NormalizationError unless every row has `vocab` entries and
/// logsumexp(row) is within `tolerance` of zero.
void check_normalized(const LogProbMatrix& rows, std::size_t vocab, double tolerance = 1e-4);
double logsumexp(const std::vector<double>& row);

/// Time-homogeneous Markov chain. The empty prefix reads `initial`; any
/// other prefix reads the transition row of its last output.
class MarkovScorer : public Scorer {
 public:
  /// Probabilities, not logs. Rows must sum to 1 within 1e-6.
  MarkovScorer(std::vector<double> initial, std::vector<std::vector<double>> transition);
  /// `{"initial":[...],"transition":[[...],...]}`.
  static MarkovScorer from_json(const nlohmann::json& j);

  std::size_t vocab_size() const override { return log_initial_.size(); }
  LogProbMatrix score(const std::vector<Prefix>& prefixes) override;
  const std::vector<double>& row(const Prefix& prefix) const;

 private:
  std::vector<double> log_initial_;
  std::vector<std::vector<double>> log_transition_;
};

/// Stored per-step log-probabilities, e.g. a classifier's outputs for the
/// items of one sequence. `null` entries mean -inf.
struct LogitFile {
  std::size_t vocab = 0;
  std::map<std::string, std::vector<std::vector<double>>> sequences;

  /// `{"vocab":V,"sequences":{"id":[[logp,...],...],...}}`.
  static LogitFile from_json(const nlohmann::json& j);
  static LogitFile load(const std::string& path);
  nlohmann::json to_json() const;
};

/// Context-independent emissions: the row for a prefix is the stored row
/// at step = prefix length.
class LogitFileScorer : public Scorer {
 public:
  LogitFileScorer(std::shared_ptr<const LogitFile> file, const std::string& sequence_id);

  std::size_t vocab_size() const override { return file_->vocab; }
  LogProbMatrix score(const std::vector<Prefix>& prefixes) override;
  std::size_t steps() const noexcept { return rows_->size(); }

 private:
  std::shared_ptr<const LogitFile> file_;
  const std::vector<std::vector<double>>* rows_;
};

/// Byte channel to a scoring bridge.
class Transport {
 public:
  virtual ~Transport() = default;
  /// Sends a `/score` request body and returns the parsed response.
  virtual nlohmann::json score(const nlohmann::json& request) = 0;
  /// Vocabulary handshake.
  virtual nlohmann::json vocab(std::int64_t id) = 0;
};

/// HTTP: `POST /score`, `GET /vocab`.
std::unique_ptr<Transport> http_transport(const std::string& url, std::chrono::milliseconds timeout);
/// Newline-delimited JSON over the stdin/stdout of a child process run
/// through /bin/sh. The vocab handshake is `{"id":n,"method":"vocab"}`.
std::unique_ptr<Transport> stdio_transport(const std::string& command, std::chrono::milliseconds timeout);

struct RemoteOptions {
  std::size_t batch_limit = 16;
  double tolerance = 1e-4;
};

/// Client of the bridge protocol. Requests larger than `batch_limit` are
/// split and the answers reassembled in order; answers are matched by id
/// and checked for normalization.
class RemoteScorer : public Scorer {
 public:
  RemoteScorer(std::unique_ptr<Transport> transport, RemoteOptions options = {});

  std::size_t vocab_size() const override { return vocab_size_; }
  LogProbMatrix score(const std::vector<Prefix>& prefixes) override;
  bool exclusive() const override { return true; }
  /// Concept table announced in the handshake, if any.
  const std::optional<nlohmann::json>& concept_table() const noexcept { return concept_table_; }
  std::size_t requests_sent() const noexcept { return requests_; }

 private:
  LogProbMatrix score_chunk(const std::vector<Prefix>& prefixes, std::size_t begin, std::size_t end);

  std::unique_ptr<Transport> transport_;
  RemoteOptions options_;
  std::size_t vocab_size_ = 0;
  std::optional<nlohmann::json> concept_table_;
  std::int64_t next_id_ = 1;
  std::size_t requests_ = 0;
};

/// `markov:FILE`, `logits:FILE[#ID]`, `remote:URL` or `remote:stdio:CMD`.
/// For logit files without `#ID` the first sequence is used.
std::unique_ptr<Scorer> make_scorer(const std::string& spec, std::chrono::milliseconds timeout = std::chrono::seconds(30));

}  // namespace ltlfbeam
