#include "dragoman/corpus.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "dragoman/error.hpp"
#include "dragoman/utf8.hpp"

namespace dragoman {

using nlohmann::ordered_json;

std::optional<double> ScoreSet::get(std::string_view key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ScoreSet::set(std::string_view key, double value) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::NonFiniteScore,
                "non-finite value for score '" + std::string(key) + "'");
  }
  const auto it = entries_.find(key);
  if (it != entries_.end()) {
    it->second = value;
  } else {
    entries_.emplace(std::string(key), value);
  }
}

Corpus Corpus::from_pairs(std::vector<SentencePair> pairs) {
  Corpus c;
  c.records.reserve(pairs.size());
  for (auto& p : pairs) c.records.push_back(Record{std::move(p), {}, {}});
  return c;
}

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

void malformed(ParseMode mode, ReadReport& report, std::size_t line_no,
               const std::string& why) {
  if (mode == ParseMode::Strict) {
    throw Error(ErrorCode::MalformedLine,
                "line " + std::to_string(line_no) + ": " + why);
  }
  ++report.malformed;
  report.malformed_lines.push_back(line_no);
}

// Empty string when the side is acceptable, otherwise the reason.
std::string check_side(std::string_view text, const char* side) {
  if (!utf8::is_valid(text)) return std::string("invalid UTF-8 in ") + side;
  if (utf8::is_blank(text)) return std::string("empty ") + side;
  return {};
}

std::optional<RecordId> parse_id(std::string_view field) {
  RecordId id = 0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, id);
  if (ec != std::errc() || ptr != end || field.empty()) return std::nullopt;
  return id;
}

}  // namespace

Corpus read_tsv(std::istream& in, ParseMode mode, ReadReport* report) {
  ReadReport local;
  ReadReport& rep = report ? *report : local;
  rep = {};
  Corpus corpus;
  std::unordered_set<RecordId> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    ++rep.lines;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos) {
      malformed(mode, rep, line_no, "expected 3 tab-separated columns");
      continue;
    }
    const std::string_view view(line);
    const auto id = parse_id(view.substr(0, t1));
    if (!id) {
      malformed(mode, rep, line_no, "id is not a non-negative integer");
      continue;
    }
    const auto source = view.substr(t1 + 1, t2 - t1 - 1);
    const auto target = view.substr(t2 + 1);
    if (auto why = check_side(source, "source"); !why.empty()) {
      malformed(mode, rep, line_no, why);
      continue;
    }
    if (auto why = check_side(target, "target"); !why.empty()) {
      malformed(mode, rep, line_no, why);
      continue;
    }
    if (!seen.insert(*id).second) {
      if (mode == ParseMode::Strict) {
        throw Error(ErrorCode::DuplicateId, "line " + std::to_string(line_no) +
                                                ": duplicate id " + std::to_string(*id));
      }
      malformed(mode, rep, line_no, "duplicate id");
      continue;
    }
    corpus.records.push_back(
        Record{SentencePair{*id, std::string(source), std::string(target)}, {}, {}});
  }
  return corpus;
}

Corpus read_tsv(const std::filesystem::path& path, ParseMode mode, ReadReport* report) {
  auto in = open_in(path);
  return read_tsv(in, mode, report);
}

Corpus read_moses_pair(std::istream& source, std::istream& target, ParseMode mode,
                       ReadReport* report) {
  ReadReport local;
  ReadReport& rep = report ? *report : local;
  rep = {};
  std::vector<std::string> src_lines;
  std::vector<std::string> tgt_lines;
  for (std::string line; std::getline(source, line);) src_lines.push_back(std::move(line));
  for (std::string line; std::getline(target, line);) tgt_lines.push_back(std::move(line));
  if (src_lines.size() != tgt_lines.size()) {
    throw Error(ErrorCode::AlignmentMismatch,
                "source has " + std::to_string(src_lines.size()) + " lines, target has " +
                    std::to_string(tgt_lines.size()));
  }
  Corpus corpus;
  corpus.records.reserve(src_lines.size());
  for (std::size_t i = 0; i < src_lines.size(); ++i) {
    ++rep.lines;
    if (auto why = check_side(src_lines[i], "source"); !why.empty()) {
      malformed(mode, rep, i + 1, why);
      continue;
    }
    if (auto why = check_side(tgt_lines[i], "target"); !why.empty()) {
      malformed(mode, rep, i + 1, why);
      continue;
    }
    corpus.records.push_back(Record{
        SentencePair{static_cast<RecordId>(i), std::move(src_lines[i]), std::move(tgt_lines[i])},
        {},
        {}});
  }
  return corpus;
}

Corpus read_moses_pair(const std::filesystem::path& source,
                       const std::filesystem::path& target, ParseMode mode,
                       ReadReport* report) {
  auto src = open_in(source);
  auto tgt = open_in(target);
  return read_moses_pair(src, tgt, mode, report);
}

Corpus read_corpus(std::span<const std::filesystem::path> paths, CorpusFormat format,
                   ParseMode mode, ReadReport* report) {
  if (format == CorpusFormat::Tsv) {
    if (paths.size() != 1) {
      throw Error(ErrorCode::InvalidArgument, "tsv format takes exactly one path");
    }
    return read_tsv(paths[0], mode, report);
  }
  if (paths.size() != 2) {
    throw Error(ErrorCode::InvalidArgument, "moses-pair format takes two paths");
  }
  return read_moses_pair(paths[0], paths[1], mode, report);
}

void write_tsv(const Corpus& corpus, std::ostream& out) {
  for (const auto& r : corpus) {
    const auto& p = r.pair;
    if (p.source.find_first_of("\t\n") != std::string::npos ||
        p.target.find_first_of("\t\n") != std::string::npos) {
      throw Error(ErrorCode::InvalidArgument,
                  "record " + std::to_string(p.id) + " contains a tab or newline");
    }
    out << p.id << '\t' << p.source << '\t' << p.target << '\n';
  }
}

void write_tsv(const Corpus& corpus, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_tsv(corpus, out);
}

std::size_t write_scores(const Corpus& corpus, std::span<const std::string> keys,
                         std::ostream& out) {
  for (const auto& r : corpus) {
    for (const auto& k : keys) {
      if (!r.scores.has(k)) {
        throw Error(ErrorCode::MissingScore, "record " + std::to_string(r.id()) +
                                                 " has no score '" + k + "'");
      }
    }
  }
  for (const auto& r : corpus) {
    ordered_json row;
    row["id"] = r.id();
    auto scores = ordered_json::object();
    for (const auto& k : keys) scores[k] = *r.scores.get(k);
    row["scores"] = std::move(scores);
    out << row.dump() << '\n';
  }
  return corpus.size();
}

std::size_t write_scores(const Corpus& corpus, std::span<const std::string> keys,
                         const std::filesystem::path& path) {
  auto out = open_out(path);
  return write_scores(corpus, keys, out);
}

namespace {

ordered_json parse_sidecar_line(const std::string& line, std::size_t line_no) {
  try {
    return ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    // JSON has no NaN/Infinity literals; writers that emit them are reporting
    // non-finite values.
    if (line.find("NaN") != std::string::npos || line.find("Infinity") != std::string::npos) {
      throw Error(ErrorCode::NonFiniteScore,
                  "sidecar line " + std::to_string(line_no) + ": non-finite value");
    }
    throw Error(ErrorCode::MalformedLine,
                "sidecar line " + std::to_string(line_no) + ": " + e.what());
  }
}

}  // namespace

Corpus read_scores(Corpus corpus, std::istream& in, ScoreMergeReport* report) {
  ScoreMergeReport local;
  ScoreMergeReport& rep = report ? *report : local;
  rep = {};

  std::unordered_map<RecordId, std::size_t> index;
  index.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) index.emplace(corpus.records[i].id(), i);

  // Parse everything first so a bad row rejects the file without partial merge.
  std::vector<std::pair<RecordId, ScoreSet>> rows;
  std::unordered_set<RecordId> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (utf8::is_blank(line)) continue;
    const auto row = parse_sidecar_line(line, line_no);
    const auto where = "sidecar line " + std::to_string(line_no);
    if (!row.is_object() || !row.contains("id") || !row["id"].is_number_unsigned() ||
        !row.contains("scores") || !row["scores"].is_object()) {
      throw Error(ErrorCode::MalformedLine, where + ": expected {\"id\":..,\"scores\":{..}}");
    }
    const auto id = row["id"].get<RecordId>();
    if (!seen.insert(id).second) {
      throw Error(ErrorCode::DuplicateId, where + ": duplicate id " + std::to_string(id));
    }
    ScoreSet scores;
    for (const auto& [key, value] : row["scores"].items()) {
      if (!value.is_number()) {
        throw Error(ErrorCode::MalformedLine, where + ": score '" + key + "' is not a number");
      }
      const double v = value.get<double>();
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::NonFiniteScore, where + ": score '" + key + "' is not finite");
      }
      scores.set(key, v);
    }
    rows.emplace_back(id, std::move(scores));
  }

  rep.rows = rows.size();
  for (auto& [id, scores] : rows) {
    const auto it = index.find(id);
    if (it == index.end()) {
      rep.unknown_ids.push_back(id);
      continue;
    }
    auto& target = corpus.records[it->second].scores;
    for (const auto& [k, v] : scores.entries()) target.set(k, v);
    ++rep.attached;
  }
  for (const auto& r : corpus) {
    if (!seen.contains(r.id())) rep.missing_ids.push_back(r.id());
  }
  return corpus;
}

Corpus read_scores(Corpus corpus, const std::filesystem::path& path,
                   ScoreMergeReport* report) {
  auto in = open_in(path);
  return read_scores(std::move(corpus), in, report);
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
  return lines;
}

}  // namespace dragoman
