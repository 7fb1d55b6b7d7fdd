#include "synthqa/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <set>

#include "synthqa/random.hpp"
#include "synthqa/report.hpp"
#include "synthqa/subprocess.hpp"

namespace synthqa {

using nlohmann::json;

std::string_view to_string(ParamKind kind) {
  switch (kind) {
    case ParamKind::Float: return "float";
    case ParamKind::Int: return "int";
    case ParamKind::Categorical: return "categorical";
    case ParamKind::Fixed: return "fixed";
  }
  return "float";
}

std::string_view to_string(TrialStatus status) {
  switch (status) {
    case TrialStatus::Completed: return "completed";
    case TrialStatus::FailedTrain: return "failed_train";
    case TrialStatus::FailedSynth: return "failed_synth";
    case TrialStatus::TimeoutTrain: return "timeout_train";
    case TrialStatus::TimeoutSynth: return "timeout_synth";
  }
  return "completed";
}

TrialStatus trial_status_from_string(std::string_view text) {
  for (auto s : {TrialStatus::Completed, TrialStatus::FailedTrain, TrialStatus::FailedSynth, TrialStatus::TimeoutTrain,
                 TrialStatus::TimeoutSynth}) {
    if (to_string(s) == text) return s;
  }
  throw Error(ErrorCode::InvalidStudy, "unknown trial status '" + std::string(text) + "'");
}

// ---------------------------------------------------------------- search space

void SearchSpace::validate() const {
  std::set<std::string> names;
  for (const auto& p : parameters) {
    if (p.name.empty()) throw Error(ErrorCode::InvalidSearchSpace, "parameter with empty name");
    if (!names.insert(p.name).second) {
      throw Error(ErrorCode::InvalidSearchSpace, "duplicate parameter '" + p.name + "'");
    }
    switch (p.kind) {
      case ParamKind::Float:
      case ParamKind::Int:
        if (!std::isfinite(p.min) || !std::isfinite(p.max) || !(p.min < p.max)) {
          throw Error(ErrorCode::InvalidSearchSpace, "parameter '" + p.name + "' needs min < max");
        }
        if (p.kind == ParamKind::Int && (p.min != std::floor(p.min) || p.max != std::floor(p.max))) {
          throw Error(ErrorCode::InvalidSearchSpace, "parameter '" + p.name + "' needs integer bounds");
        }
        if (p.log_scale && p.min <= 0) {
          throw Error(ErrorCode::InvalidSearchSpace, "log-scaled parameter '" + p.name + "' needs min > 0");
        }
        break;
      case ParamKind::Categorical:
        if (p.choices.empty()) throw Error(ErrorCode::InvalidSearchSpace, "parameter '" + p.name + "' has no choices");
        break;
      case ParamKind::Fixed:
        if (p.value.is_null()) {
          throw Error(ErrorCode::InvalidSearchSpace, "fixed parameter '" + p.name + "' has no value");
        }
        break;
    }
  }
  std::set<std::string> strata_names;
  for (const auto& s : strata) {
    if (s.name.empty()) throw Error(ErrorCode::InvalidSearchSpace, "stratum with empty name");
    if (!strata_names.insert(s.name).second) {
      throw Error(ErrorCode::InvalidSearchSpace, "duplicate stratum '" + s.name + "'");
    }
    if (!s.values.is_object()) {
      throw Error(ErrorCode::InvalidSearchSpace, "stratum '" + s.name + "' values must be an object");
    }
  }
}

const Parameter* SearchSpace::find(std::string_view name) const {
  for (const auto& p : parameters) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

SearchSpace parse_search_space(const json& doc) {
  SearchSpace space;
  try {
    if (!doc.is_object() || !doc.contains("parameters") || !doc["parameters"].is_array()) {
      throw Error(ErrorCode::InvalidSearchSpace, "expected an object with a \"parameters\" array");
    }
    for (const auto& item : doc["parameters"]) {
      Parameter p;
      p.name = item.at("name").get<std::string>();
      const auto type = item.at("type").get<std::string>();
      if (type == "float" || type == "int") {
        p.kind = type == "float" ? ParamKind::Float : ParamKind::Int;
        p.min = item.at("min").get<double>();
        p.max = item.at("max").get<double>();
        p.log_scale = item.value("log", false);
      } else if (type == "categorical") {
        p.kind = ParamKind::Categorical;
        p.choices = item.at("choices").get<std::vector<json>>();
      } else if (type == "fixed") {
        p.kind = ParamKind::Fixed;
        p.value = item.at("value");
      } else {
        throw Error(ErrorCode::InvalidSearchSpace, "parameter '" + p.name + "': unknown type '" + type + "'");
      }
      space.parameters.push_back(std::move(p));
    }
    if (doc.contains("strata")) {
      for (const auto& item : doc["strata"]) {
        space.strata.push_back({item.at("name").get<std::string>(), item.value("values", json::object())});
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidSearchSpace, e.what());
  }
  space.validate();
  return space;
}

SearchSpace load_search_space(const std::filesystem::path& path) {
  const json doc = read_json_file(path);
  try {
    return parse_search_space(doc);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

json search_space_to_json(const SearchSpace& space) {
  json params = json::array();
  for (const auto& p : space.parameters) {
    json item{{"name", p.name}, {"type", std::string(to_string(p.kind))}};
    if (p.kind == ParamKind::Float || p.kind == ParamKind::Int) {
      item["min"] = p.min;
      item["max"] = p.max;
      item["log"] = p.log_scale;
    } else if (p.kind == ParamKind::Categorical) {
      item["choices"] = p.choices;
    } else {
      item["value"] = p.value;
    }
    params.push_back(std::move(item));
  }
  json doc{{"parameters", std::move(params)}};
  if (!space.strata.empty()) {
    json strata = json::array();
    for (const auto& s : space.strata) strata.push_back({{"name", s.name}, {"values", s.values}});
    doc["strata"] = std::move(strata);
  }
  return doc;
}

// ---------------------------------------------------------------- trials

json trial_to_json(const Trial& t) {
  return json{{"id", t.id},
              {"stratum", t.stratum},
              {"params", t.params},
              {"status", std::string(to_string(t.status))},
              {"objectives", t.completed() ? json(t.objectives) : json(nullptr)},
              {"train_seconds", t.train_seconds},
              {"synth_seconds", t.synth_seconds},
              {"message", t.message}};
}

Trial trial_from_json(const json& doc) {
  Trial t;
  try {
    t.id = doc.at("id").get<std::size_t>();
    t.stratum = doc.value("stratum", "");
    t.params = doc.value("params", json::object());
    t.status = trial_status_from_string(doc.at("status").get<std::string>());
    if (t.completed()) t.objectives = doc.at("objectives").get<std::vector<double>>();
    t.train_seconds = doc.value("train_seconds", 0.0);
    t.synth_seconds = doc.value("synth_seconds", 0.0);
    t.message = doc.value("message", "");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidStudy, std::string("malformed trial: ") + e.what());
  }
  if (t.completed() && t.objectives.empty()) throw Error(ErrorCode::InvalidStudy, "completed trial without objectives");
  return t;
}

std::vector<Objective> objectives_for_schema(const Schema& schema) {
  const std::size_t n_cat = schema.count(ColumnKind::Categorical);
  const std::size_t n_num = schema.count(ColumnKind::Numerical);
  std::vector<Objective> out;
  if (n_cat > 0) out.push_back({n_cat >= 2 ? "mae2" : "mae1", Direction::Minimize});
  if (n_num > 0) out.push_back({n_num >= 2 ? "hist_iou2" : "hist_iou1", Direction::Maximize});
  return out;
}

std::size_t Study::n_completed() const {
  return static_cast<std::size_t>(std::count_if(trials.begin(), trials.end(), [](const Trial& t) { return t.completed(); }));
}

void Study::validate() const {
  space.validate();
  if (config.budget < 1) throw Error(ErrorCode::InvalidStudy, "budget must be at least 1");
  if (config.objectives.empty() || config.objectives.size() > 2) {
    throw Error(ErrorCode::InvalidStudy, "a study needs one or two objectives");
  }
  if (!(config.tpe.gamma > 0.0 && config.tpe.gamma <= 1.0) || config.tpe.n_candidates == 0) {
    throw Error(ErrorCode::InvalidStudy, "invalid TPE options");
  }
}

// ---------------------------------------------------------------- TPE

namespace {

std::uint64_t hash_text(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Continuous parameters live in [0, 1]; integers cover [min - 0.5, max + 0.5]
// so that every value gets an equal share after rounding.
struct UnitMap {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;

  explicit UnitMap(const Parameter& p) : log(p.log_scale) {
    lo = p.kind == ParamKind::Int ? p.min - 0.5 : p.min;
    hi = p.kind == ParamKind::Int ? p.max + 0.5 : p.max;
    if (log) {
      lo = std::log(lo);
      hi = std::log(hi);
    }
  }

  double to_unit(double v) const {
    const double x = log ? std::log(v) : v;
    return std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
  }

  double from_unit(double u) const {
    const double x = lo + std::clamp(u, 0.0, 1.0) * (hi - lo);
    return log ? std::exp(x) : x;
  }
};

json value_from_unit(const Parameter& p, double u) {
  const double v = UnitMap(p).from_unit(u);
  if (p.kind == ParamKind::Int) return static_cast<std::int64_t>(std::clamp(std::round(v), p.min, p.max));
  return std::clamp(v, p.min, p.max);
}

std::optional<double> unit_of(const Parameter& p, const json& v) {
  if (!v.is_number()) return std::nullopt;
  const double x = v.get<double>();
  if (!std::isfinite(x) || x < p.min || x > p.max) return std::nullopt;
  return UnitMap(p).to_unit(x);
}

std::optional<std::size_t> choice_of(const Parameter& p, const json& v) {
  for (std::size_t i = 0; i < p.choices.size(); ++i) {
    if (p.choices[i] == v) return i;
  }
  return std::nullopt;
}

double quantile_sorted(const std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= v.size()) return v.back();
  return v[i] + (pos - static_cast<double>(i)) * (v[i + 1] - v[i]);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Mixture of Gaussians truncated to [0, 1]: one kernel per observation plus a
// broad prior kernel.
class Parzen {
 public:
  Parzen(const std::vector<double>& obs, const TpeOptions& opt) {
    double bw = opt.bandwidth_floor;
    if (obs.size() >= 2) {
      const double n = static_cast<double>(obs.size());
      double mean = 0.0;
      for (double x : obs) mean += x;
      mean /= n;
      double var = 0.0;
      for (double x : obs) var += (x - mean) * (x - mean);
      const double sd = std::sqrt(var / (n - 1.0));
      std::vector<double> sorted = obs;
      std::sort(sorted.begin(), sorted.end());
      const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
      const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
      bw = std::max(0.9 * spread * std::pow(n, -0.2), opt.bandwidth_floor);
    }
    for (double x : obs) add(x, bw, 1.0);
    add(0.5, 1.0, opt.prior_weight);
    for (double w : weight_) total_ += w;
  }

  double sample(Rng& rng) const {
    double pick = rng.uniform() * total_;
    std::size_t k = 0;
    while (k + 1 < weight_.size() && pick >= weight_[k]) pick -= weight_[k++];
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const double x = mu_[k] + sigma_[k] * rng.normal();
      if (x >= 0.0 && x <= 1.0) return x;
    }
    return std::clamp(mu_[k], 0.0, 1.0);
  }

  double log_density(double x) const {
    double d = 0.0;
    for (std::size_t k = 0; k < mu_.size(); ++k) {
      const double z = (x - mu_[k]) / sigma_[k];
      d += weight_[k] * std::exp(-0.5 * z * z) / (sigma_[k] * std::sqrt(2.0 * std::numbers::pi) * mass_[k]);
    }
    return std::log(std::max(d / total_, std::numeric_limits<double>::min()));
  }

 private:
  void add(double mu, double sigma, double w) {
    mu_.push_back(mu);
    sigma_.push_back(sigma);
    weight_.push_back(w);
    mass_.push_back(std::max(normal_cdf((1.0 - mu) / sigma) - normal_cdf(-mu / sigma), 1e-300));
  }

  std::vector<double> mu_, sigma_, weight_, mass_;
  double total_ = 0.0;
};

std::vector<double> categorical_weights(const std::vector<std::size_t>& obs, std::size_t n_choices, double prior) {
  std::vector<double> w(n_choices, prior / static_cast<double>(n_choices));
  for (auto c : obs) w[c] += 1.0;
  const double total = static_cast<double>(obs.size()) + prior;
  for (auto& x : w) x /= total;
  return w;
}

std::size_t sample_index(const std::vector<double>& w, Rng& rng) {
  double total = 0.0;
  for (double x : w) total += x;
  double pick = rng.uniform() * total;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    if (pick < w[i]) return i;
    pick -= w[i];
  }
  return w.size() - 1;
}

double van_der_corput(std::uint64_t index, std::uint64_t base) {
  double result = 0.0;
  double f = 1.0 / static_cast<double>(base);
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= static_cast<double>(base);
  }
  return result;
}

std::uint64_t nth_prime(std::size_t n) {
  std::vector<std::uint64_t> primes;
  for (std::uint64_t c = 2; primes.size() <= n; ++c) {
    bool prime = true;
    for (auto p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
  }
  return primes[n];
}

// Indices of the completed trials forming the good set.
std::vector<std::size_t> good_set(const std::vector<const Trial*>& done, const StudyConfig& config) {
  const std::size_t n = done.size();
  const auto n_good = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(config.tpe.gamma * static_cast<double>(n) - 1e-9)));
  std::vector<std::size_t> chosen;
  if (config.objectives.size() == 1) {
    const bool minimize = config.objectives[0].direction == Direction::Minimize;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double x = done[a]->objectives[0];
      const double y = done[b]->objectives[0];
      return minimize ? x < y : x > y;
    });
    chosen.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(std::min(n_good, n)));
    return chosen;
  }
  std::vector<Point> points;
  for (const auto* t : done) points.push_back(t->objectives);
  std::vector<Direction> dirs;
  for (const auto& o : config.objectives) dirs.push_back(o.direction);
  for (const auto& front : non_dominated_sort(points, dirs)) {
    if (chosen.size() + front.size() <= n_good) {
      chosen.insert(chosen.end(), front.begin(), front.end());
      if (chosen.size() == n_good) break;
      continue;
    }
    const auto dist = crowding_distance(points, front);
    std::vector<std::size_t> order(front.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] > dist[b]; });
    for (std::size_t i = 0; chosen.size() < n_good; ++i) chosen.push_back(front[order[i]]);
    break;
  }
  return chosen;
}

}  // namespace

json suggest(const Study& study) {
  const auto& space = study.space;
  const auto& config = study.config;
  json assignment = json::object();
  for (const auto& p : space.parameters) {
    if (p.kind == ParamKind::Fixed) assignment[p.name] = p.value;
  }
  for (const auto& s : space.strata) {
    if (s.name == study.stratum) {
      for (const auto& [k, v] : s.values.items()) assignment[k] = v;
    }
  }
  std::vector<const Parameter*> free;
  for (const auto& p : space.parameters) {
    if (p.optimized() && !assignment.contains(p.name)) free.push_back(&p);
  }

  std::vector<const Trial*> done;
  for (const auto& t : study.trials) {
    if (t.completed() && t.objectives.size() == config.objectives.size()) done.push_back(&t);
  }
  const std::uint64_t stratum_key = hash_text(study.stratum);

  if (done.size() < config.tpe.n_startup) {
    Rng shift_rng(derive_seed({config.seed, stratum_key, 0x51A7ULL}));
    const std::uint64_t index = done.size() + 1;
    for (std::size_t d = 0; d < free.size(); ++d) {
      const Parameter& p = *free[d];
      double u = van_der_corput(index, nth_prime(d)) + shift_rng.uniform();
      u -= std::floor(u);
      if (p.kind == ParamKind::Categorical) {
        const auto i = std::min(p.choices.size() - 1, static_cast<std::size_t>(u * static_cast<double>(p.choices.size())));
        assignment[p.name] = p.choices[i];
      } else {
        assignment[p.name] = value_from_unit(p, u);
      }
    }
    return assignment;
  }

  Rng rng(derive_seed({config.seed, stratum_key, done.size()}));
  const auto good_idx = good_set(done, config);
  std::vector<bool> is_good(done.size(), false);
  for (auto i : good_idx) is_good[i] = true;

  for (const Parameter* pp : free) {
    const Parameter& p = *pp;
    if (p.kind == ParamKind::Categorical) {
      std::vector<std::size_t> good, bad;
      for (std::size_t i = 0; i < done.size(); ++i) {
        if (!done[i]->params.contains(p.name)) continue;
        if (auto c = choice_of(p, done[i]->params[p.name])) (is_good[i] ? good : bad).push_back(*c);
      }
      const auto l = categorical_weights(good, p.choices.size(), config.tpe.prior_weight);
      const auto g = categorical_weights(bad, p.choices.size(), config.tpe.prior_weight);
      std::size_t best = 0;
      double best_score = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < config.tpe.n_candidates; ++k) {
        const std::size_t c = sample_index(l, rng);
        const double score = std::log(l[c]) - std::log(g[c]);
        if (score > best_score) {
          best_score = score;
          best = c;
        }
      }
      assignment[p.name] = p.choices[best];
    } else {
      std::vector<double> good, bad;
      for (std::size_t i = 0; i < done.size(); ++i) {
        if (!done[i]->params.contains(p.name)) continue;
        if (auto u = unit_of(p, done[i]->params[p.name])) (is_good[i] ? good : bad).push_back(*u);
      }
      const Parzen l(good, config.tpe);
      const Parzen g(bad, config.tpe);
      double best = 0.5;
      double best_score = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < config.tpe.n_candidates; ++k) {
        const double x = l.sample(rng);
        const double score = l.log_density(x) - g.log_density(x);
        if (score > best_score) {
          best_score = score;
          best = x;
        }
      }
      assignment[p.name] = value_from_unit(p, best);
    }
  }
  return assignment;
}

// ---------------------------------------------------------------- execution

TrialOutcome run_external(const ExternalSynthCommand& command, const TableData& real,
                          const std::vector<Objective>& objectives, const json& params, std::size_t trial_id,
                          double train_timeout, double synth_timeout) {
  namespace fs = std::filesystem;
  TrialOutcome out;
  std::error_code ec;
  const fs::path dir = fs::absolute(command.workdir, ec) / ("trial_" + std::to_string(trial_id));
  fs::remove_all(dir, ec);
  fs::create_directories(dir, ec);
  if (ec) {
    out.status = TrialStatus::FailedTrain;
    out.message = "cannot create workdir '" + dir.string() + "': " + ec.message();
    return out;
  }
  const fs::path params_path = dir / "params.json";
  const fs::path synth_path = dir / "synth.csv";
  try {
    write_json_file(params_path, params);
  } catch (const Error& e) {
    out.status = TrialStatus::FailedTrain;
    out.message = e.what();
    return out;
  }

  auto train_argv = command.argv;
  for (const char* a : {"train", "--real"}) train_argv.emplace_back(a);
  train_argv.push_back(fs::absolute(command.real_csv).string());
  train_argv.emplace_back("--schema");
  train_argv.push_back(fs::absolute(command.schema_json).string());
  train_argv.emplace_back("--params");
  train_argv.push_back(params_path.string());
  train_argv.emplace_back("--workdir");
  train_argv.push_back(dir.string());
  const auto train = run_process(train_argv, train_timeout, dir / "train.log");
  out.train_seconds = train.seconds;
  if (!train.ok()) {
    out.status = train.timed_out ? TrialStatus::TimeoutTrain : TrialStatus::FailedTrain;
    out.message = !train.error.empty() ? train.error : "train exited with code " + std::to_string(train.exit_code);
    return out;
  }

  const std::size_t n = command.n_synth ? command.n_synth : real.n_rows();
  auto synth_argv = command.argv;
  for (const char* a : {"synth", "--workdir"}) synth_argv.emplace_back(a);
  synth_argv.push_back(dir.string());
  synth_argv.emplace_back("--n");
  synth_argv.push_back(std::to_string(n));
  synth_argv.emplace_back("--out");
  synth_argv.push_back(synth_path.string());
  const auto synth = run_process(synth_argv, synth_timeout, dir / "synth.log");
  out.synth_seconds = synth.seconds;
  if (!synth.ok()) {
    out.status = synth.timed_out ? TrialStatus::TimeoutSynth : TrialStatus::FailedSynth;
    out.message = !synth.error.empty() ? synth.error : "synth exited with code " + std::to_string(synth.exit_code);
    return out;
  }

  try {
    const TableData data = load_csv(synth_path, real.schema());
    const QualityReport report = evaluate(real, data, command.evaluate);
    for (const auto& o : objectives) {
      const auto v = report.metric(o.metric);
      if (!v || !std::isfinite(*v)) {
        out.status = TrialStatus::FailedSynth;
        out.message = "objective '" + o.metric + "' undefined for the synthetic output";
        out.objectives.clear();
        return out;
      }
      out.objectives.push_back(*v);
    }
  } catch (const std::exception& e) {
    out.status = TrialStatus::FailedSynth;
    out.message = std::string("unreadable output: ") + e.what();
    out.objectives.clear();
    return out;
  }
  out.status = TrialStatus::Completed;
  return out;
}

Trial run_trial(const Study& study, const json& params, std::size_t trial_id, const TrialRunner& runner) {
  Trial t;
  t.id = trial_id;
  t.stratum = study.stratum;
  t.params = params;
  TrialOutcome outcome;
  try {
    outcome = runner(params, trial_id);
  } catch (const std::exception& e) {
    outcome = {};
    outcome.status = TrialStatus::FailedTrain;
    outcome.message = std::string("runner error: ") + e.what();
  }
  t.status = outcome.status;
  t.train_seconds = outcome.train_seconds;
  t.synth_seconds = outcome.synth_seconds;
  t.message = outcome.message;
  if (t.completed()) {
    const bool finite = std::all_of(outcome.objectives.begin(), outcome.objectives.end(),
                                    [](double v) { return std::isfinite(v); });
    if (outcome.objectives.size() != study.config.objectives.size() || !finite) {
      t.status = TrialStatus::FailedSynth;
      t.message = "runner returned invalid objectives";
    } else {
      t.objectives = outcome.objectives;
    }
  }
  return t;
}

std::vector<Trial> load_journal(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open journal '" + path.string() + "'");
  std::vector<Trial> trials;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception&) {
      // A torn final line from an interrupted write is dropped.
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw Error(ErrorCode::InvalidStudy, path.string() + ":" + std::to_string(line_no) + ": malformed line");
    }
    trials.push_back(trial_from_json(doc));
  }
  return trials;
}

void append_journal(const std::filesystem::path& path, const Trial& trial) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot append to journal '" + path.string() + "'");
  out << trial_to_json(trial).dump() << '\n';
  out.flush();
}

void optimize(Study& study, const TrialRunner& runner, std::size_t& next_id,
              const std::optional<std::filesystem::path>& journal, const TrialCallback& on_trial) {
  study.validate();
  while (study.n_completed() < study.config.budget) {
    const json params = suggest(study);
    Trial t = run_trial(study, params, next_id++, runner);
    if (journal) append_journal(*journal, t);
    study.trials.push_back(std::move(t));
    if (on_trial) on_trial(study.trials.back());
  }
}

std::vector<Study> optimize_space(const SearchSpace& space, const StudyConfig& config, const TrialRunner& runner,
                                  const std::optional<std::filesystem::path>& journal, const TrialCallback& on_trial) {
  std::vector<Trial> history;
  if (journal && std::filesystem::exists(*journal)) history = load_journal(*journal);
  std::size_t next_id = 0;
  for (const auto& t : history) next_id = std::max(next_id, t.id + 1);

  std::vector<std::string> names;
  for (const auto& s : space.strata) names.push_back(s.name);
  if (names.empty()) names.emplace_back();

  std::vector<Study> studies;
  for (const auto& name : names) {
    Study study{space, config, name, {}};
    for (const auto& t : history) {
      if (t.stratum == name) study.trials.push_back(t);
    }
    std::stable_sort(study.trials.begin(), study.trials.end(),
                     [](const Trial& a, const Trial& b) { return a.id < b.id; });
    optimize(study, runner, next_id, journal, on_trial);
    studies.push_back(std::move(study));
  }
  return studies;
}

std::vector<Trial> best(const Study& study) {
  std::vector<const Trial*> done;
  for (const auto& t : study.trials) {
    if (t.completed()) done.push_back(&t);
  }
  if (done.empty()) throw Error(ErrorCode::NoCompletedTrials, "study has no completed trials");
  std::stable_sort(done.begin(), done.end(), [](const Trial* a, const Trial* b) { return a->id < b->id; });
  const auto& objectives = study.config.objectives;
  if (objectives.size() == 1) {
    const bool minimize = objectives[0].direction == Direction::Minimize;
    const Trial* winner = done[0];
    for (const auto* t : done) {
      const double x = t->objectives[0];
      const double y = winner->objectives[0];
      if (minimize ? x < y : x > y) winner = t;
    }
    return {*winner};
  }
  std::vector<Point> points;
  for (const auto* t : done) points.push_back(t->objectives);
  std::vector<Direction> dirs;
  for (const auto& o : objectives) dirs.push_back(o.direction);
  std::vector<Trial> front;
  const auto fronts = non_dominated_sort(points, dirs);
  for (auto i : fronts.front()) front.push_back(*done[i]);
  return front;
}

}  // namespace synthqa
