// Copyright 2026 The MoR Forge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mor/bench.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdio>

#include "mor/error.hpp"
#include "mor/judge.hpp"

namespace mor {

Json EvalReport::to_json() const {
  Json per = Json::object();
  for (const auto& [d, s] : per_dataset)
    per[std::string(dataset_name(d))] = {{"n", s.n}, {"score_sum", s.score_sum}, {"accuracy", s.accuracy}};
  return {{"model_id", model_id},
          {"regime", regime_name(regime)},
          {"per_dataset", std::move(per)},
          {"overall", overall},
          {"seed", seed},
          {"timestamp", timestamp}};
}

EvalReport EvalReport::from_json(const Json& j) {
  EvalReport r;
  try {
    r.model_id = j.at("model_id").get<std::string>();
    r.regime = parse_eval_regime(j.at("regime").get<std::string>());
    for (const auto& [name, s] : j.at("per_dataset").items()) {
      DatasetScore ds;
      ds.n = s.at("n").get<std::size_t>();
      ds.score_sum = s.at("score_sum").get<double>();
      ds.accuracy = s.at("accuracy").get<double>();
      r.per_dataset[parse_dataset(name)] = ds;
    }
    r.overall = j.at("overall").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.timestamp = j.at("timestamp").get<std::string>();
  } catch (const Json::exception& e) {
    throw Error(Errc::Parse, std::string("bad report: ") + e.what());
  }
  return r;
}

double aggregate_overall(std::span<const double> accuracies) {
  if (accuracies.size() != kAllDatasets.size())
    throw Error(Errc::WrongArity, "overall needs exactly " + std::to_string(kAllDatasets.size()) +
                                      " accuracies, got " + std::to_string(accuracies.size()));
  double sum = 0.0;
  for (double a : accuracies) {
    if (!(a >= 0.0 && a <= 1.0))
      throw Error(Errc::InvalidArgument, "accuracy out of [0,1]: " + std::to_string(a));
    sum += a;
  }
  return sum / static_cast<double>(accuracies.size());
}

double round_half_up(double value, int digits) {
  const double scale = std::pow(10.0, digits);
  return std::floor(value * scale + 0.5 + 1e-9) / scale;
}

namespace {

struct Item {
  Dataset dataset;
  const Sample* sample;
};

}  // namespace

EvalReport run_eval(Provider& model, const std::map<Dataset, std::vector<Sample>>& testsets,
                    Regime regime, const EvalOptions& options) {
  if (regime != Regime::IO && regime != Regime::CoT)
    throw Error(Errc::InvalidArgument, "evaluation runs under io or cot only");
  for (auto d : kAllDatasets) {
    const auto it = testsets.find(d);
    if ((it == testsets.end() || it->second.empty()) && !options.allow_subset)
      throw Error(Errc::MissingDataset, "no test slice for " + std::string(dataset_name(d)));
  }

  std::vector<Item> items;
  for (auto d : kAllDatasets) {
    const auto it = testsets.find(d);
    if (it == testsets.end()) continue;
    for (const auto& s : it->second) {
      s.validate();
      items.push_back({d, &s});
    }
  }

  std::vector<std::string> outputs(items.size());
  std::vector<Verdict> verdicts(items.size());
  parallel_for(items.size(), options.workers, [&](std::size_t i) {
    const auto& s = *items[i].sample;
    const auto prompt = build_eval_prompt(s, regime);
    const auto resp = model.complete(
        model.make_request(prompt.messages, options.temperature, options.max_tokens));
    outputs[i] = resp.content;
    verdicts[i] = judge_sample(s, resp.content);
  });

  EvalReport report;
  report.model_id = model.model_id();
  report.regime = regime;
  report.seed = options.seed;
  report.timestamp = options.timestamp.empty() ? utc_now() : options.timestamp;
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto& ds = report.per_dataset[items[i].dataset];
    ++ds.n;
    ds.score_sum += verdicts[i].score;
  }
  std::vector<double> accs;
  for (auto& [d, ds] : report.per_dataset) {
    ds.accuracy = ds.n ? ds.score_sum / static_cast<double>(ds.n) : 0.0;
    accs.push_back(ds.accuracy);
  }
  if (accs.size() == kAllDatasets.size()) {
    report.overall = aggregate_overall(accs);
  } else if (!accs.empty()) {
    double sum = 0.0;
    for (double a : accs) sum += a;
    report.overall = sum / static_cast<double>(accs.size());
  }

  if (options.audit_path) {
    std::string audit;
    for (std::size_t i = 0; i < items.size(); ++i) {
      auto line = verdict_to_json(items[i].sample->id, verdicts[i]);
      line["dataset"] = dataset_name(items[i].dataset);
      line["regime"] = regime_name(regime);
      line["output"] = outputs[i];
      audit += canonical_json(line);
      audit.push_back('\n');
    }
    write_file_atomic(*options.audit_path, audit);
  }
  spdlog::info("eval {} ({}): overall {:.3f}", report.model_id, regime_name(regime),
               round_half_up(report.overall, 3));
  return report;
}

std::size_t bigtom_per_setting(std::size_t n) noexcept {
  return n == 50 ? 20 : n / kBeliefSettings.size();
}

std::map<Dataset, std::vector<Sample>> build_test_slices(
    const std::map<Dataset, std::vector<Sample>>& pools, std::size_t n, std::uint64_t seed) {
  std::map<Dataset, std::vector<Sample>> slices;
  for (const auto& [d, samples] : pools) {
    if (d == Dataset::BigTom)
      slices[d] = sample_bigtom(samples, bigtom_per_setting(n), seed);
    else
      slices[d] = split_disjoint(samples, 0, n, seed).test;
  }
  return slices;
}

ReportFormat parse_report_format(std::string_view name) {
  const auto lower = ascii_lower(name);
  if (lower == "json") return ReportFormat::Json;
  if (lower == "table") return ReportFormat::Table;
  throw Error(Errc::Config, "unknown report format '" + std::string(name) + "'");
}

namespace {

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", round_half_up(v, 3));
  return buf;
}

// Display width in code points; the dash placeholder is multi-byte.
std::size_t width(const std::string& s) {
  std::size_t w = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++w;
  return w;
}

std::string regime_label(Regime r) { return r == Regime::CoT ? "CoT" : "IO"; }

}  // namespace

std::string render_report(std::span<const EvalReport> reports, ReportFormat format) {
  if (format == ReportFormat::Json) {
    if (reports.size() == 1) return reports[0].to_json().dump(2) + "\n";
    Json arr = Json::array();
    for (const auto& r : reports) arr.push_back(r.to_json());
    return arr.dump(2) + "\n";
  }

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"Model", "Prompt"};
  for (auto d : kAllDatasets) header.emplace_back(dataset_title(d));
  header.emplace_back("overall");
  rows.push_back(header);
  for (const auto& r : reports) {
    std::vector<std::string> row{r.model_id, regime_label(r.regime)};
    for (auto d : kAllDatasets) {
      const auto it = r.per_dataset.find(d);
      row.push_back(it == r.per_dataset.end() ? "—" : fixed3(it->second.accuracy));
    }
    row.push_back(r.per_dataset.empty() ? "—" : fixed3(r.overall));
    rows.push_back(std::move(row));
  }

  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], width(row[c]));

  std::string out;
  const auto emit = [&](const std::vector<std::string>& row) {
    out += "|";
    for (std::size_t c = 0; c < row.size(); ++c) {
      out += " " + row[c] + std::string(widths[c] - width(row[c]), ' ') + " |";
    }
    out += "\n";
  };
  emit(rows[0]);
  out += "|";
  for (auto w : widths) out += std::string(w + 2, '-') + "|";
  out += "\n";
  for (std::size_t i = 1; i < rows.size(); ++i) emit(rows[i]);
  return out;
}

}  // namespace mor
