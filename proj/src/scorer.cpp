#include "ltlfbeam/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>

#include "ltlfbeam/errors.hpp"

namespace ltlfbeam {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> log_row(const std::vector<double>& probs, const char* what) {
  double sum = 0;
  std::vector<double> out;
  out.reserve(probs.size());
  for (double p : probs) {
    if (!(p >= 0) || !std::isfinite(p)) throw InvalidInputError(std::string(what) + " has a negative or non-finite entry");
    sum += p;
    out.push_back(p > 0 ? std::log(p) : kNegInf);
  }
  if (std::abs(sum - 1.0) > 1e-6) throw InvalidInputError(std::string(what) + " does not sum to 1");
  return out;
}

double logp_from_json(const nlohmann::json& v) {
  if (v.is_null()) return kNegInf;
  if (!v.is_number()) throw InvalidInputError("log-probability must be a number or null");
  return v.get<double>();
}

}  // namespace

double logsumexp(const std::vector<double>& row) {
  double hi = kNegInf;
  for (double v : row) hi = std::max(hi, v);
  if (hi == kNegInf || !std::isfinite(hi)) return hi;
  double sum = 0;
  for (double v : row) sum += std::exp(v - hi);
  return hi + std::log(sum);
}

void check_normalized(const LogProbMatrix& rows, std::size_t vocab, double tolerance) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != vocab) {
      throw NormalizationError("row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                               " entries, expected " + std::to_string(vocab));
    }
    for (double v : rows[i]) {
      if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
        throw NormalizationError("row " + std::to_string(i) + " contains NaN or +inf");
      }
    }
    const double z = logsumexp(rows[i]);
    if (!(std::abs(z) <= tolerance)) {
      throw NormalizationError("row " + std::to_string(i) + " has logsumexp " + std::to_string(z));
    }
  }
}

MarkovScorer::MarkovScorer(std::vector<double> initial, std::vector<std::vector<double>> transition) {
  if (initial.empty()) throw InvalidInputError("Markov chain has no states");
  if (transition.size() != initial.size()) throw InvalidInputError("transition matrix must be square over the outputs");
  log_initial_ = log_row(initial, "initial distribution");
  for (const auto& row : transition) {
    if (row.size() != initial.size()) throw InvalidInputError("transition matrix must be square over the outputs");
    log_transition_.push_back(log_row(row, "transition row"));
  }
}

MarkovScorer MarkovScorer::from_json(const nlohmann::json& j) {
  try {
    return MarkovScorer(j.at("initial").get<std::vector<double>>(),
                        j.at("transition").get<std::vector<std::vector<double>>>());
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError(std::string("malformed Markov chain JSON: ") + e.what());
  }
}

const std::vector<double>& MarkovScorer::row(const Prefix& prefix) const {
  if (prefix.empty()) return log_initial_;
  const OutputId last = prefix.back();
  if (last >= log_transition_.size()) throw InvalidInputError("output id " + std::to_string(last) + " out of range");
  return log_transition_[last];
}

LogProbMatrix MarkovScorer::score(const std::vector<Prefix>& prefixes) {
  LogProbMatrix out;
  out.reserve(prefixes.size());
  for (const auto& p : prefixes) out.push_back(row(p));
  return out;
}

LogitFile LogitFile::from_json(const nlohmann::json& j) {
  LogitFile f;
  try {
    f.vocab = j.at("vocab").get<std::size_t>();
    for (const auto& [id, steps] : j.at("sequences").items()) {
      std::vector<std::vector<double>> rows;
      for (const auto& step : steps) {
        std::vector<double> row;
        for (const auto& v : step) row.push_back(logp_from_json(v));
        if (row.size() != f.vocab) throw InvalidInputError("sequence '" + id + "' has a row of the wrong width");
        rows.push_back(std::move(row));
      }
      f.sequences.emplace(id, std::move(rows));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError(std::string("malformed logit file: ") + e.what());
  }
  if (f.vocab == 0) throw InvalidInputError("logit file vocabulary is empty");
  return f;
}

LogitFile LogitFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open " + path);
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInputError(path + ": " + e.what());
  }
}

nlohmann::json LogitFile::to_json() const {
  nlohmann::json j;
  j["vocab"] = vocab;
  j["sequences"] = nlohmann::json::object();
  for (const auto& [id, rows] : sequences) {
    auto& out = j["sequences"][id];
    out = nlohmann::json::array();
    for (const auto& row : rows) {
      auto r = nlohmann::json::array();
      for (double v : row) r.push_back(std::isinf(v) ? nlohmann::json(nullptr) : nlohmann::json(v));
      out.push_back(std::move(r));
    }
  }
  return j;
}

LogitFileScorer::LogitFileScorer(std::shared_ptr<const LogitFile> file, const std::string& sequence_id)
    : file_(std::move(file)) {
  auto it = file_->sequences.find(sequence_id);
  if (it == file_->sequences.end()) throw InvalidInputError("logit file has no sequence '" + sequence_id + "'");
  rows_ = &it->second;
}

LogProbMatrix LogitFileScorer::score(const std::vector<Prefix>& prefixes) {
  LogProbMatrix out;
  out.reserve(prefixes.size());
  for (const auto& p : prefixes) {
    if (p.size() >= rows_->size()) {
      throw InvalidInputError("step " + std::to_string(p.size()) + " beyond the " + std::to_string(rows_->size()) +
                              " stored steps");
    }
    out.push_back((*rows_)[p.size()]);
  }
  return out;
}

RemoteScorer::RemoteScorer(std::unique_ptr<Transport> transport, RemoteOptions options)
    : transport_(std::move(transport)), options_(options) {
  if (options_.batch_limit == 0) throw InvalidInputError("batch limit must be positive");
  const nlohmann::json hello = transport_->vocab(0);
  if (!hello.is_object() || !hello.contains("vocab_size") || !hello["vocab_size"].is_number_unsigned()) {
    throw ProtocolError("vocab handshake lacks an unsigned vocab_size");
  }
  vocab_size_ = hello["vocab_size"].get<std::size_t>();
  if (vocab_size_ == 0) throw ProtocolError("bridge reports an empty vocabulary");
  if (hello.contains("concept_table") && !hello["concept_table"].is_null()) concept_table_ = hello["concept_table"];
}

LogProbMatrix RemoteScorer::score_chunk(const std::vector<Prefix>& prefixes, std::size_t begin, std::size_t end) {
  const std::int64_t id = next_id_++;
  nlohmann::json request;
  request["id"] = id;
  request["prefixes"] = nlohmann::json::array();
  for (std::size_t i = begin; i < end; ++i) request["prefixes"].push_back(prefixes[i]);
  ++requests_;
  const nlohmann::json reply = transport_->score(request);
  if (!reply.is_object() || !reply.contains("id") || !reply.contains("logprobs")) {
    throw ProtocolError("score response must carry id and logprobs");
  }
  if (reply["id"] != id) throw ProtocolError("response id " + reply["id"].dump() + " does not match request " + std::to_string(id));
  const auto& rows = reply["logprobs"];
  if (!rows.is_array() || rows.size() != end - begin) throw ProtocolError("response has the wrong number of rows");
  LogProbMatrix out;
  for (const auto& r : rows) {
    if (!r.is_array()) throw ProtocolError("logprobs row must be an array");
    std::vector<double> row;
    row.reserve(r.size());
    for (const auto& v : r) {
      if (v.is_null()) {
        row.push_back(kNegInf);
      } else if (v.is_number()) {
        row.push_back(v.get<double>());
      } else {
        throw ProtocolError("logprobs entries must be numbers or null");
      }
    }
    out.push_back(std::move(row));
  }
  check_normalized(out, vocab_size_, options_.tolerance);
  return out;
}

LogProbMatrix RemoteScorer::score(const std::vector<Prefix>& prefixes) {
  LogProbMatrix out;
  out.reserve(prefixes.size());
  for (std::size_t begin = 0; begin < prefixes.size(); begin += options_.batch_limit) {
    const std::size_t end = std::min(prefixes.size(), begin + options_.batch_limit);
    auto chunk = score_chunk(prefixes, begin, end);
    std::move(chunk.begin(), chunk.end(), std::back_inserter(out));
  }
  return out;
}

std::unique_ptr<Scorer> make_scorer(const std::string& spec, std::chrono::milliseconds timeout) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw InvalidInputError("scorer spec must look like kind:argument");
  const std::string kind = spec.substr(0, colon);
  const std::string arg = spec.substr(colon + 1);
  if (kind == "markov") {
    std::ifstream in(arg);
    if (!in) throw InvalidInputError("cannot open " + arg);
    try {
      return std::make_unique<MarkovScorer>(MarkovScorer::from_json(nlohmann::json::parse(in)));
    } catch (const nlohmann::json::parse_error& e) {
      throw InvalidInputError(arg + ": " + e.what());
    }
  }
  if (kind == "logits") {
    const auto hash = arg.rfind('#');
    const std::string path = hash == std::string::npos ? arg : arg.substr(0, hash);
    auto file = std::make_shared<const LogitFile>(LogitFile::load(path));
    if (file->sequences.empty()) throw InvalidInputError(path + " holds no sequences");
    const std::string id = hash == std::string::npos ? file->sequences.begin()->first : arg.substr(hash + 1);
    return std::make_unique<LogitFileScorer>(std::move(file), id);
  }
  if (kind == "remote") {
    if (arg.rfind("stdio:", 0) == 0) return std::make_unique<RemoteScorer>(stdio_transport(arg.substr(6), timeout));
    return std::make_unique<RemoteScorer>(http_transport(arg, timeout));
  }
  throw InvalidInputError("unknown scorer kind '" + kind + "'");
}

}  // namespace ltlfbeam
