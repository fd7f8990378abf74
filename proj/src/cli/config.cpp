#include "adascale/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "adascale/errors.hpp"

namespace adascale::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Like split(s, ','), but commas inside parentheses stay put.
std::vector<std::string_view> split_top_level(std::string_view s) {
  std::vector<std::string_view> out;
  if (trim(s).empty()) return out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || (s[i] == ',' && depth == 0)) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    } else if (s[i] == '(') {
      ++depth;
    } else if (s[i] == ')') {
      --depth;
    }
  }
  return out;
}

template <class T>
T parse_number(std::string_view key, std::string_view v) {
  v = trim(v);
  T x{};
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc{} || p != end || v.empty())
    throw ConfigError(fmt::format("{}: cannot parse '{}'", key, v));
  return x;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(fmt::format("{}: expected true or false, got '{}'", key, v));
}

template <class T>
std::vector<T> parse_list(std::string_view key, std::string_view v) {
  std::vector<T> out;
  for (auto item : split(v, ',')) out.push_back(parse_number<T>(key, item));
  return out;
}

std::string num(double x) { return fmt::format("{:.17g}", x); }

std::string list(const std::vector<double>& v) {
  std::vector<std::string> parts;
  for (double x : v) parts.push_back(num(x));
  return fmt::format("{}", fmt::join(parts, ", "));
}

template <class T>
std::string int_list(const std::vector<T>& v) {
  return fmt::format("{}", fmt::join(v, ", "));
}

std::optional<std::int64_t> parse_optional_int(std::string_view key, std::string_view v) {
  if (v == "none" || v.empty()) return std::nullopt;
  return parse_number<std::int64_t>(key, v);
}

std::string optional_int(const std::optional<std::int64_t>& v) {
  return v ? std::to_string(*v) : "none";
}

std::vector<ElasticStage> parse_elastic(std::string_view key, std::string_view v) {
  std::vector<ElasticStage> out;
  for (auto item : split(v, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string_view::npos)
      throw ConfigError(fmt::format("{}: expected start_tau:S, got '{}'", key, item));
    out.push_back({parse_number<double>(key, item.substr(0, colon)),
                   parse_number<int>(key, item.substr(colon + 1))});
  }
  return out;
}

std::string elastic_text(const std::vector<ElasticStage>& stages) {
  std::vector<std::string> parts;
  for (const auto& s : stages) parts.push_back(fmt::format("{}:{}", num(s.start_tau), s.S));
  return fmt::format("{}", fmt::join(parts, ", "));
}

void apply(ExperimentSpec& spec, std::string_view key, std::string_view v) {
  auto& o = spec.train.objective;
  auto& c = o.classifier;
  auto& s = spec.train.schedule;
  auto& t = spec.train;
  auto sweep = [&]() -> SweepAxis& {
    if (!spec.sweep) spec.sweep.emplace();
    return *spec.sweep;
  };

  if (key == "objective.kind") {
    o.kind = std::string(v);
    if (o.kind == "mlp") c.model = ClassifierOptions::Model::mlp;
    else if (o.kind == "logistic") c.model = ClassifierOptions::Model::logistic;
    else if (o.kind != "noisy_quadratic")
      throw ConfigError(fmt::format("objective.kind: unknown objective '{}'", v));
  }
  else if (key == "objective.a_diag") o.a_diag = parse_list<double>(key, v);
  else if (key == "objective.a_full") o.a_full = parse_list<double>(key, v);
  else if (key == "objective.sigma_diag") o.sigma_diag = parse_list<double>(key, v);
  else if (key == "objective.sigma_full") o.sigma_full = parse_list<double>(key, v);
  else if (key == "objective.w_star") o.w_star = parse_list<double>(key, v);
  else if (key == "objective.w0") o.w0 = parse_list<double>(key, v);
  else if (key == "objective.nu") o.nu = parse_number<double>(key, v);
  else if (key == "objective.n_examples") c.n_examples = parse_number<std::size_t>(key, v);
  else if (key == "objective.features") c.features = parse_number<std::size_t>(key, v);
  else if (key == "objective.hidden") c.hidden = parse_number<std::size_t>(key, v);
  else if (key == "objective.batch_size") c.batch_size = parse_number<std::size_t>(key, v);
  else if (key == "objective.separation") c.separation = parse_number<double>(key, v);
  else if (key == "objective.l2") c.l2 = parse_number<double>(key, v);
  else if (key == "objective.data_seed") c.data_seed = parse_number<std::uint64_t>(key, v);
  else if (key == "schedule.family") s.family = parse_family(v);
  else if (key == "schedule.eta0") s.eta0 = parse_number<double>(key, v);
  else if (key == "schedule.d") s.d = parse_number<double>(key, v);
  else if (key == "schedule.milestones") s.milestones = parse_list<std::int64_t>(key, v);
  else if (key == "schedule.T_S1") s.T_S1 = parse_number<std::int64_t>(key, v);
  else if (key == "run.algorithm") t.algorithm = parse_algorithm(v);
  else if (key == "run.rule") t.rule = parse_rule(v);
  else if (key == "run.S") t.S = parse_number<int>(key, v);
  else if (key == "run.elastic") t.elastic = parse_elastic(key, v);
  else if (key == "run.T") t.T = parse_optional_int(key, v);
  else if (key == "run.T_SI") t.T_SI = parse_optional_int(key, v);
  else if (key == "run.rho") t.rho = parse_number<double>(key, v);
  else if (key == "run.warmup_fraction") t.warmup_fraction = parse_number<double>(key, v);
  else if (key == "run.T_target") t.T_target = parse_number<std::int64_t>(key, v);
  else if (key == "run.seeds") spec.seeds = parse_seed_list(v);
  else if (key == "run.out") spec.out_dir = std::string(v);
  else if (key == "gain.variant") t.gain.variant = parse_gain_variant(v);
  else if (key == "gain.theta") {
    if (v == "default") t.gain.theta.reset();
    else t.gain.theta = parse_number<double>(key, v);
  }
  else if (key == "gain.epsilon") t.gain.epsilon = parse_number<double>(key, v);
  else if (key == "gain.exclude_current") t.gain.exclude_current = parse_bool(key, v);
  else if (key == "compare.every") spec.compare_every = parse_number<std::int64_t>(key, v);
  else if (key == "compare.batches") spec.oracle_batches = parse_number<std::size_t>(key, v);
  else if (key == "sweep.axis") sweep().kind = parse_sweep_kind(v);
  else if (key == "sweep.S") sweep().S = parse_list<int>(key, v);
  else if (key == "sweep.theta") {
    auto& th = sweep().theta;
    th.clear();
    for (auto item : split_top_level(v)) {
      eval_theta(item, 1);  // syntax check
      th.emplace_back(item);
    }
  }
  else if (key == "sweep.eta0") sweep().eta0 = parse_list<double>(key, v);
  else if (key == "sweep.d") sweep().d = parse_list<double>(key, v);
  else throw ConfigError(fmt::format("unknown key '{}'", key));
}

}  // namespace

void SweepAxis::validate() const {
  if (size() == 0) throw ConfigError(fmt::format("sweep axis '{}' is empty", to_string(kind)));
  for (int s : S)
    if (s < 1) throw ConfigError("sweep.S values must be >= 1");
}

std::size_t SweepAxis::size() const {
  switch (kind) {
    case SweepKind::S: return S.size();
    case SweepKind::theta: return theta.size();
    case SweepKind::lr_grid: return eta0.size() * d.size();
  }
  return 0;
}

void ExperimentSpec::validate() const {
  train.validate();
  if (sweep) sweep->validate();
  if (seeds.empty()) throw ConfigError("need at least one seed");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw ConfigError("seed list contains duplicates");
  if (compare_every < 1) throw ConfigError("compare.every must be >= 1");
  if (oracle_batches < 2) throw ConfigError("compare.batches must be >= 2");
}

ExperimentSpec parse_spec(std::string_view text) {
  ExperimentSpec spec;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(fmt::format("line {}: expected key = value", line_no));
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (!seen.emplace(key).second)
      throw ConfigError(fmt::format("line {}: key '{}' repeated", line_no, key));
    try {
      apply(spec, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("line {}: {}", line_no, e.what()));
    }
  }
  return spec;
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str());
}

std::string serialize_spec(const ExperimentSpec& spec) {
  const auto& t = spec.train;
  const auto& o = t.objective;
  const auto& c = o.classifier;
  const auto& s = t.schedule;
  std::string out;
  auto line = [&](std::string_view key, const std::string& value) {
    out += fmt::format("{} = {}\n", key, value);
  };
  line("objective.kind", o.kind);
  line("objective.a_diag", list(o.a_diag));
  line("objective.a_full", list(o.a_full));
  line("objective.sigma_diag", list(o.sigma_diag));
  line("objective.sigma_full", list(o.sigma_full));
  line("objective.w_star", list(o.w_star));
  line("objective.w0", list(o.w0));
  line("objective.nu", num(o.nu));
  line("objective.n_examples", std::to_string(c.n_examples));
  line("objective.features", std::to_string(c.features));
  line("objective.hidden", std::to_string(c.hidden));
  line("objective.batch_size", std::to_string(c.batch_size));
  line("objective.separation", num(c.separation));
  line("objective.l2", num(c.l2));
  line("objective.data_seed", std::to_string(c.data_seed));
  line("schedule.family", std::string(to_string(s.family)));
  line("schedule.eta0", num(s.eta0));
  line("schedule.d", num(s.d));
  line("schedule.milestones", int_list(s.milestones));
  line("schedule.T_S1", std::to_string(s.T_S1));
  line("run.algorithm", std::string(to_string(t.algorithm)));
  line("run.rule", std::string(to_string(t.rule)));
  line("run.S", std::to_string(t.S));
  line("run.elastic", elastic_text(t.elastic));
  line("run.T", optional_int(t.T));
  line("run.T_SI", optional_int(t.T_SI));
  line("run.rho", num(t.rho));
  line("run.warmup_fraction", num(t.warmup_fraction));
  line("run.T_target", std::to_string(t.T_target));
  line("run.seeds", int_list(spec.seeds));
  line("run.out", spec.out_dir.string());
  line("gain.variant", std::string(to_string(t.gain.variant)));
  line("gain.theta", t.gain.theta ? num(*t.gain.theta) : "default");
  line("gain.epsilon", num(t.gain.epsilon));
  line("gain.exclude_current", t.gain.exclude_current ? "true" : "false");
  line("compare.every", std::to_string(spec.compare_every));
  line("compare.batches", std::to_string(spec.oracle_batches));
  if (spec.sweep) {
    const auto& w = *spec.sweep;
    line("sweep.axis", std::string(to_string(w.kind)));
    line("sweep.S", int_list(w.S));
    line("sweep.theta", fmt::format("{}", fmt::join(w.theta, ", ")));
    line("sweep.eta0", list(w.eta0));
    line("sweep.d", list(w.d));
  }
  return out;
}

double eval_theta(std::string_view expr, int S) {
  std::string e;
  for (char ch : expr)
    if (ch != ' ') e += ch;
  const double Sd = static_cast<double>(S);
  auto fraction = [&](std::string_view body) -> std::optional<double> {
    constexpr std::string_view prefix = "1-S/";
    if (body.substr(0, prefix.size()) != prefix) return std::nullopt;
    const double n = parse_number<double>("gain.theta", body.substr(prefix.size()));
    if (!(n > 0.0)) throw ConfigError("theta expression divides by a non-positive number");
    return 1.0 - Sd / n;
  };
  double theta;
  std::string_view v = e;
  if (v.substr(0, 4) == "max(" && v.size() > 7 && v.substr(v.size() - 3) == ",0)") {
    auto inner = fraction(v.substr(4, v.size() - 7));
    if (!inner) throw ConfigError(fmt::format("cannot parse theta '{}'", expr));
    theta = std::max(*inner, 0.0);
  } else if (auto f = fraction(v)) {
    theta = *f;
  } else {
    theta = parse_number<double>("gain.theta", v);
  }
  if (!(theta >= 0.0 && theta < 1.0))
    throw ConfigError(fmt::format("theta '{}' at S = {} is {}, outside [0, 1)", expr, S, theta));
  return theta;
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  auto seeds = parse_list<std::uint64_t>("seeds", text);
  if (seeds.empty()) throw ConfigError("seed list is empty");
  return seeds;
}

std::string_view to_string(SweepKind k) {
  switch (k) {
    case SweepKind::S: return "S";
    case SweepKind::theta: return "theta";
    case SweepKind::lr_grid: return "lr_grid";
  }
  return "S";
}

SweepKind parse_sweep_kind(std::string_view s) {
  if (s == "S") return SweepKind::S;
  if (s == "theta") return SweepKind::theta;
  if (s == "lr_grid") return SweepKind::lr_grid;
  throw ConfigError(fmt::format("unknown sweep axis '{}' (S, theta, lr_grid)", s));
}

}  // namespace adascale::cli
