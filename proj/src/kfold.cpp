#include "dragoman/kfold.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "dragoman/error.hpp"
#include "dragoman/parallel.hpp"
#include "dragoman/utf8.hpp"

namespace dragoman {

FoldPlan::FoldPlan(int k, std::unordered_map<RecordId, int> assignment)
    : k_(k), assignment_(std::move(assignment)) {}

int FoldPlan::fold_of(RecordId id) const {
  const auto it = assignment_.find(id);
  if (it == assignment_.end()) {
    throw Error(ErrorCode::InvalidArgument, "fold plan does not cover id " + std::to_string(id));
  }
  return it->second;
}

std::vector<std::size_t> FoldPlan::fold_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k_), 0);
  for (const auto& [_, f] : assignment_) ++sizes[static_cast<std::size_t>(f)];
  return sizes;
}

namespace {

// Unbiased draw from [0, n); std::uniform_int_distribution is not portable.
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

}  // namespace

FoldPlan make_folds(const Corpus& corpus, int k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "k must be >= 2");
  if (corpus.size() < static_cast<std::size_t>(k)) {
    throw Error(ErrorCode::CorpusTooSmall, "corpus has " + std::to_string(corpus.size()) +
                                               " records, fewer than k=" + std::to_string(k));
  }
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::swap(order[i], order[draw_below(rng, i + 1)]);
  }
  std::unordered_map<RecordId, int> assignment;
  assignment.reserve(corpus.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const auto id = corpus.records[order[rank]].id();
    if (!assignment.emplace(id, static_cast<int>(rank % static_cast<std::size_t>(k))).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate id " + std::to_string(id));
    }
  }
  return FoldPlan(k, std::move(assignment));
}

std::string scored_text(const SentencePair& pair, const CrossvalConfig& config) {
  switch (config.side) {
    case ScoredSide::Source: return pair.source;
    case ScoredSide::Target: return pair.target;
    case ScoredSide::Concatenated: return pair.source + config.separator + pair.target;
  }
  return {};
}

Corpus crossval_score(Corpus corpus, const FoldPlan& plan, const CrossvalConfig& config,
                      CrossvalAudit* audit) {
  const auto k = static_cast<std::size_t>(plan.k());
  std::vector<int> fold(corpus.size());
  std::vector<std::string> texts(corpus.size());
  std::vector<bool> usable(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& r = corpus.records[i];
    fold[i] = plan.fold_of(r.id());
    texts[i] = scored_text(r.pair, config);
    const bool blank_side = (config.side != ScoredSide::Target && utf8::is_blank(r.pair.source)) ||
                            (config.side != ScoredSide::Source && utf8::is_blank(r.pair.target));
    usable[i] = !blank_side && !utf8::is_blank(texts[i]);
  }

  std::vector<std::optional<CharNGramLM>> models(k);
  std::vector<std::vector<RecordId>> trained_on(k);
  parallel_for(k, config.workers, [&](std::size_t f) {
    std::vector<std::string> train;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (static_cast<std::size_t>(fold[i]) == f || !usable[i]) continue;
      train.push_back(texts[i]);
      trained_on[f].push_back(corpus.records[i].id());
    }
    models[f].emplace(CharNGramLM::train(train, config.lm));
  });

  parallel_for(corpus.size(), config.workers, [&](std::size_t i) {
    auto& r = corpus.records[i];
    if (!usable[i]) {
      if (r.flag.empty()) r.flag = "empty";
      return;
    }
    const auto& model = *models[static_cast<std::size_t>(fold[i])];
    double lp = model.log_prob(texts[i]);
    if (config.per_char) lp /= static_cast<double>(utf8::length(texts[i]));
    r.scores.set(keys::kLogprob, lp);
  });

  if (audit) {
    audit->training_ids = std::move(trained_on);
    audit->scored_by.clear();
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (usable[i]) audit->scored_by.emplace_back(corpus.records[i].id(), fold[i]);
    }
  }
  return corpus;
}

std::size_t nearest_rank(std::size_t n, double q) {
  if (!(q > 0.0 && q <= 100.0)) {
    throw Error(ErrorCode::InvalidArgument, "percentile must lie in (0, 100]");
  }
  // The relative slack absorbs representation error in q (e.g. 95.4).
  const double x = q * static_cast<double>(n) / 100.0;
  auto rank = static_cast<std::size_t>(std::ceil(x - 1e-9 * std::max(1.0, x)));
  return std::clamp<std::size_t>(rank, n == 0 ? 0 : 1, n);
}

Cutoffs percentile_threshold(std::span<const std::vector<double>> surprisal_groups, double q,
                             ThresholdMode mode) {
  if (mode != ThresholdMode::TwoSigma && !(q > 0.0 && q <= 100.0)) {
    throw Error(ErrorCode::InvalidArgument, "percentile must lie in (0, 100]");
  }
  if (surprisal_groups.empty()) throw Error(ErrorCode::EmptyFold, "no score groups");
  for (std::size_t g = 0; g < surprisal_groups.size(); ++g) {
    if (surprisal_groups[g].empty()) {
      throw Error(ErrorCode::EmptyFold, "fold " + std::to_string(g) + " has no scores");
    }
  }
  Cutoffs out;
  out.mode = mode;
  out.q = q;

  auto percentile_of = [&](std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const auto rank = nearest_rank(values.size(), q);
    out.values.push_back(values[rank - 1]);
    out.ranks.push_back(rank);
  };

  switch (mode) {
    case ThresholdMode::PerFold:
      for (const auto& g : surprisal_groups) percentile_of(g);
      break;
    case ThresholdMode::Global: {
      std::vector<double> all;
      for (const auto& g : surprisal_groups) all.insert(all.end(), g.begin(), g.end());
      percentile_of(std::move(all));
      break;
    }
    case ThresholdMode::TwoSigma:
      for (const auto& g : surprisal_groups) {
        const double n = static_cast<double>(g.size());
        const double mean = std::accumulate(g.begin(), g.end(), 0.0) / n;
        double ss = 0.0;
        for (double v : g) ss += (v - mean) * (v - mean);
        out.values.push_back(mean + 2.0 * std::sqrt(ss / n));
      }
      break;
  }
  return out;
}

std::string mode_name(ThresholdMode mode) {
  switch (mode) {
    case ThresholdMode::PerFold: return "per_fold";
    case ThresholdMode::Global: return "global";
    case ThresholdMode::TwoSigma: return "two_sigma";
  }
  return "?";
}

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string percentile_label(double q) {
  std::ostringstream s;
  if (q == std::floor(q)) {
    s << static_cast<long long>(q);
  } else {
    s << fmt(q);
  }
  return s.str();
}

}  // namespace

Selection select(const Corpus& corpus, const FoldPlan& plan, double q, ThresholdMode mode) {
  struct Entry {
    double surprisal;
    RecordId id;
    std::size_t index;
  };
  const std::size_t groups =
      mode == ThresholdMode::Global ? 1 : static_cast<std::size_t>(plan.k());
  std::vector<std::vector<Entry>> entries(groups);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& r = corpus.records[i];
    if (!r.flag.empty()) continue;
    const auto lp = r.scores.get(keys::kLogprob);
    if (!lp) {
      throw Error(ErrorCode::MissingScore,
                  "record " + std::to_string(r.id()) + " has no score 'logprob'");
    }
    const std::size_t g =
        mode == ThresholdMode::Global ? 0 : static_cast<std::size_t>(plan.fold_of(r.id()));
    entries[g].push_back({-*lp, r.id(), i});
  }

  std::vector<std::vector<double>> surprisals(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    for (const auto& e : entries[g]) surprisals[g].push_back(e.surprisal);
  }

  Selection sel;
  sel.manifest.mode = mode;
  sel.manifest.cutoffs = percentile_threshold(surprisals, q, mode);
  if (mode == ThresholdMode::TwoSigma) {
    sel.manifest.label = "2sigma";
  } else {
    sel.manifest.q = q;
    sel.manifest.label = percentile_label(q);
  }

  std::vector<bool> keep(corpus.size(), false);
  for (std::size_t g = 0; g < groups; ++g) {
    auto& group = entries[g];
    if (mode == ThresholdMode::TwoSigma) {
      for (const auto& e : group) {
        if (e.surprisal <= sel.manifest.cutoffs.values[g]) keep[e.index] = true;
      }
      continue;
    }
    std::sort(group.begin(), group.end(), [](const Entry& a, const Entry& b) {
      if (a.surprisal != b.surprisal) return a.surprisal < b.surprisal;
      return a.id < b.id;
    });
    const auto rank = sel.manifest.cutoffs.ranks[g];
    for (std::size_t j = 0; j < rank; ++j) keep[group[j].index] = true;
  }

  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& r = corpus.records[i];
    if (keep[i]) {
      sel.retained.records.push_back(r);
      sel.manifest.retained_ids.push_back(r.id());
    } else {
      sel.manifest.removed_ids.push_back(r.id());
    }
  }
  std::sort(sel.manifest.retained_ids.begin(), sel.manifest.retained_ids.end());
  std::sort(sel.manifest.removed_ids.begin(), sel.manifest.removed_ids.end());
  return sel;
}

SelectionSweep sweep(const Corpus& corpus, const FoldPlan& plan,
                     std::span<const double> percentiles, ThresholdMode mode,
                     bool include_two_sigma) {
  if (mode == ThresholdMode::TwoSigma) {
    throw Error(ErrorCode::InvalidArgument,
                "sweep percentiles need per_fold or global mode; use include_two_sigma");
  }
  SelectionSweep out;
  out.corpus_size = corpus.size();
  std::vector<double> qs(percentiles.begin(), percentiles.end());
  std::sort(qs.begin(), qs.end());
  for (double q : qs) {
    auto sel = select(corpus, plan, q, mode);
    out.rows.push_back({sel.manifest.label + "th", sel.manifest.retained_ids.size(),
                        sel.manifest.removed_ids.size()});
    out.manifests.push_back(std::move(sel.manifest));
  }
  if (include_two_sigma) {
    auto sel = select(corpus, plan, 100.0, ThresholdMode::TwoSigma);
    const double pct = corpus.empty() ? 0.0
                                      : 100.0 * static_cast<double>(sel.manifest.retained_ids.size()) /
                                            static_cast<double>(corpus.size());
    std::ostringstream label;
    label.setf(std::ios::fixed);
    label.precision(1);
    label << pct << "th (2sigma)";
    out.rows.push_back({label.str(), sel.manifest.retained_ids.size(),
                        sel.manifest.removed_ids.size()});
    out.manifests.push_back(std::move(sel.manifest));
  }
  return out;
}

std::string SelectionSweep::to_tsv() const {
  std::ostringstream out;
  out << "threshold\texamples\tdev_bleu\tdevtest_bleu\n";
  for (const auto& row : rows) out << row.label << '\t' << row.retained << "\t\t\n";
  return out.str();
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write_ids = [&](const std::string& name, const std::vector<RecordId>& ids) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + (dir / name).string());
    for (auto id : ids) out << id << '\n';
  };
  write_ids("retained_" + manifest.label + ".txt", manifest.retained_ids);
  write_ids("removed_" + manifest.label + ".txt", manifest.removed_ids);

  nlohmann::ordered_json j;
  j["threshold"] = manifest.label;
  j["mode"] = mode_name(manifest.mode);
  if (manifest.q) j["percentile"] = *manifest.q;
  j["cutoffs"] = manifest.cutoffs.values;
  j["retained"] = manifest.retained_ids.size();
  j["removed"] = manifest.removed_ids.size();
  std::ofstream out(dir / ("summary_" + manifest.label + ".json"), std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write summary in " + dir.string());
  out << j.dump(2) << '\n';
}

}  // namespace dragoman
