#include "ipmlab/harness/config.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "ipmlab/errors.hpp"
#include "json.hpp"

namespace ipmlab::harness {
namespace {

using nlohmann::json;

constexpr std::array kKindNames{std::pair{ExperimentKind::simulate, "simulate"},
                                std::pair{ExperimentKind::ipm, "ipm"},
                                std::pair{ExperimentKind::compare, "compare"},
                                std::pair{ExperimentKind::counterexample, "counterexample"},
                                std::pair{ExperimentKind::sweep, "sweep"}};

constexpr std::array<std::string_view, 3> kObjectiveNames{"constant", "gaussian_bump",
                                                          "rastrigin_floor"};
constexpr std::array<std::string_view, 3> kKernelNames{"zero_noise", "gaussian", "uniform_box"};
constexpr std::array<std::string_view, 3> kOperatorNames{"selection", "mutation",
                                                         "recombination"};
constexpr std::array<std::string_view, 2> kRecombinationNames{"mean", "uniform"};
constexpr std::array<std::string_view, 2> kIpmMethods{"grid", "particle"};

template <std::size_t N>
bool known(const std::array<std::string_view, N>& names, std::string_view s) {
  return std::find(names.begin(), names.end(), s) != names.end();
}

template <std::size_t N>
std::string listing(const std::array<std::string_view, N>& names) {
  std::string out;
  for (auto n : names) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

std::string join_path(const std::string& parent, std::string_view key) {
  return parent.empty() ? std::string(key) : parent + "." + std::string(key);
}

// Reads one JSON object, remembering which keys were consumed so that
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(std::string_view key) {
    used_.insert(std::string(key));
    return node_.contains(key);
  }

  const json* raw(std::string_view key) {
    if (!has(key)) return nullptr;
    return &node_.at(std::string(key));
  }

  std::string key_path(std::string_view key) const { return join_path(path_, key); }

  double number(std::string_view key, double fallback) {
    const json* v = raw(key);
    if (!v) return fallback;
    return as_number(*v, key_path(key));
  }

  std::size_t count(std::string_view key, std::size_t fallback) {
    const json* v = raw(key);
    if (!v) return fallback;
    return as_count(*v, key_path(key));
  }

  std::string text(std::string_view key, std::string fallback) {
    const json* v = raw(key);
    if (!v) return fallback;
    if (!v->is_string()) throw ConfigError(key_path(key), "expected a string");
    return v->get<std::string>();
  }

  std::vector<double> numbers(std::string_view key, std::vector<double> fallback) {
    const json* v = raw(key);
    if (!v) return fallback;
    if (!v->is_array()) throw ConfigError(key_path(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      out.push_back(as_number((*v)[i], key_path(key) + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  std::vector<std::size_t> counts(std::string_view key, std::vector<std::size_t> fallback) {
    const json* v = raw(key);
    if (!v) return fallback;
    if (!v->is_array()) throw ConfigError(key_path(key), "expected an array of integers");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      out.push_back(as_count((*v)[i], key_path(key) + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  std::optional<Section> child(std::string_view key) {
    const json* v = raw(key);
    if (!v) return std::nullopt;
    return Section(*v, key_path(key));
  }

  void finish() const {
    for (const auto& item : node_.items()) {
      if (!used_.count(item.key())) throw ConfigError(key_path(item.key()), "unknown key");
    }
  }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(path, "expected a finite number");
    return x;
  }

  static std::size_t as_count(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::size_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::size_t>();
    throw ConfigError(path, "expected a nonnegative integer");
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string, std::less<>> used_;
};

void require(bool ok, const std::string& path, const std::string& msg) {
  if (!ok) throw ConfigError(path, msg);
}

ObjectiveConfig parse_objective(Section s) {
  ObjectiveConfig o;
  o.name = s.text("name", o.name);
  require(known(kObjectiveNames, o.name), s.key_path("name"),
          "unknown objective '" + o.name + "' (known: " + listing(kObjectiveNames) + ")");
  o.value = s.number("value", o.value);
  o.floor = s.number("floor", o.floor);
  o.amplitude = s.number("amplitude", o.amplitude);
  o.center = s.number("center", o.center);
  o.width = s.number("width", o.width);
  if (auto d = s.child("domain")) {
    o.domain.lo = d->number("lo", o.domain.lo);
    o.domain.hi = d->number("hi", o.domain.hi);
    d->finish();
  }
  require(o.domain.lo < o.domain.hi, s.key_path("domain"), "bounds need lo < hi");
  if (o.name == "constant") require(o.value > 0.0, s.key_path("value"), "must be > 0");
  if (o.name != "constant") require(o.floor > 0.0, s.key_path("floor"), "must be > 0");
  if (o.name == "gaussian_bump") {
    require(o.amplitude >= 0.0, s.key_path("amplitude"), "must be >= 0");
    require(o.width > 0.0, s.key_path("width"), "must be > 0");
  }
  s.finish();
  return o;
}

KernelConfig parse_kernel(Section s) {
  KernelConfig k;
  k.name = s.text("name", k.name);
  require(known(kKernelNames, k.name), s.key_path("name"),
          "unknown kernel '" + k.name + "' (known: " + listing(kKernelNames) + ")");
  k.sigma = s.number("sigma", k.sigma);
  k.half_width = s.number("half_width", k.half_width);
  require(k.sigma > 0.0, s.key_path("sigma"), "must be > 0");
  require(k.half_width > 0.0, s.key_path("half_width"), "must be > 0");
  s.finish();
  return k;
}

InitLaw parse_init(Section s) {
  const std::string law = s.text("law", "gaussian");
  InitLaw out;
  if (law == "gaussian") {
    GaussianLaw g;
    g.mean = s.number("mean", g.mean);
    g.sd = s.number("sd", g.sd);
    require(g.sd > 0.0, s.key_path("sd"), "must be > 0");
    out = g;
  } else if (law == "uniform") {
    UniformLaw u;
    u.lo = s.number("lo", u.lo);
    u.hi = s.number("hi", u.hi);
    require(u.lo < u.hi, s.key_path("hi"), "bounds need lo < hi");
    out = u;
  } else if (law == "mixture") {
    GaussianMixtureLaw m;
    m.centers = s.numbers("centers", {-2.0, 2.0});
    m.weights = s.numbers("weights", std::vector<double>(m.centers.size(),
                                                         1.0 / static_cast<double>(
                                                                   std::max<std::size_t>(
                                                                       1, m.centers.size()))));
    m.within_sd = s.number("within_sd", 0.5);
    try {
      validate_law(m);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(s.key_path("weights"), e.what());
    }
    out = m;
  } else {
    throw ConfigError(s.key_path("law"),
                      "unknown init law '" + law + "' (known: gaussian, uniform, mixture)");
  }
  s.finish();
  return out;
}

void check_ascending(const std::vector<std::size_t>& xs, const std::string& path) {
  require(!xs.empty(), path, "must not be empty");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    require(xs[i] >= 1, path + "[" + std::to_string(i) + "]", "must be >= 1");
    if (i > 0) {
      require(xs[i - 1] < xs[i], path + "[" + std::to_string(i) + "]",
              "sizes must be strictly ascending");
    }
  }
}

ExperimentConfig parse_root(const json& root) {
  Section s(root, "");
  ExperimentConfig c;
  {
    if (const json* kind = s.raw("kind")) {
      require(kind->is_string(), "kind", "expected a string");
      c.kind = kind_from_name(kind->get<std::string>());
    }
  }
  {
    const json* seed = s.raw("seed");
    require(seed != nullptr, "seed", "missing master seed (no default is provided)");
    if (seed->is_number_unsigned()) {
      c.seed = seed->get<std::uint64_t>();
    } else if (seed->is_number_integer() && seed->get<std::int64_t>() >= 0) {
      c.seed = static_cast<std::uint64_t>(seed->get<std::int64_t>());
    } else {
      throw ConfigError("seed", "expected an unsigned 64-bit integer");
    }
  }
  c.dimension = s.count("dimension", c.dimension);
  require(c.dimension >= 1, "dimension", "must be >= 1");
  if (auto o = s.child("objective")) c.objective = parse_objective(std::move(*o));
  if (auto k = s.child("kernel")) c.kernel = parse_kernel(std::move(*k));
  c.recombination = s.text("recombination", c.recombination);
  require(known(kRecombinationNames, c.recombination), "recombination",
          "unknown recombination preset '" + c.recombination +
              "' (known: " + listing(kRecombinationNames) + ")");
  if (const json* st = s.raw("stack")) {
    require(st->is_array() && !st->empty(), "stack", "expected a nonempty array of operator names");
    c.stack.clear();
    for (std::size_t i = 0; i < st->size(); ++i) {
      const std::string path = "stack[" + std::to_string(i) + "]";
      require((*st)[i].is_string(), path, "expected an operator name");
      const auto name = (*st)[i].get<std::string>();
      require(known(kOperatorNames, name), path,
              "unknown operator '" + name + "' (known: " + listing(kOperatorNames) + ")");
      c.stack.push_back(name);
    }
  }
  if (auto i = s.child("init")) c.init = parse_init(std::move(*i));
  c.generations = s.count("generations", c.generations);
  c.sizes = s.counts("sizes", c.sizes);
  check_ascending(c.sizes, "sizes");
  c.replicates = s.count("replicates", c.replicates);
  require(c.replicates >= 1, "replicates", "must be >= 1");
  c.particles = s.count("particles", c.particles);
  c.grid_bins = s.count("grid_bins", c.grid_bins);
  require(c.grid_bins >= 2, "grid_bins", "must be >= 2");
  c.ipm_method = s.text("ipm_method", c.ipm_method);
  require(known(kIpmMethods, c.ipm_method), "ipm_method",
          "unknown ipm method '" + c.ipm_method + "' (known: " + listing(kIpmMethods) + ")");
  c.tv_bins = s.count("tv_bins", c.tv_bins);
  require(c.tv_bins >= 2, "tv_bins", "must be >= 2");
  c.output_dir = s.text("output_dir", c.output_dir);
  require(!c.output_dir.empty(), "output_dir", "must not be empty");

  if (auto t = s.child("thresholds")) {
    c.thresholds.ks_same_law = t->number("ks_same_law", c.thresholds.ks_same_law);
    c.thresholds.ks_final = t->number("ks_final", c.thresholds.ks_final);
    c.thresholds.exchangeability = t->number("exchangeability", c.thresholds.exchangeability);
    c.thresholds.gap_multiple = t->number("gap_multiple", c.thresholds.gap_multiple);
    t->finish();
  }
  if (auto cmp = s.child("compare")) {
    c.compare.k = cmp->count("k", c.compare.k);
    c.compare.n = cmp->count("n", c.compare.n);
    cmp->finish();
  }
  if (auto l = s.child("lln")) {
    c.lln.g_min = l->number("g_min", c.lln.g_min);
    c.lln.g_max = l->number("g_max", c.lln.g_max);
    c.lln.N = l->count("N", c.lln.N);
    c.lln.replicates = l->count("replicates", c.lln.replicates);
    if (l->raw("z_half_width")) c.lln.z_half_width = l->number("z_half_width", 0.0);
    if (l->raw("y_half_width")) c.lln.y_half_width = l->number("y_half_width", 0.0);
    require(c.lln.g_min > 0.0 && c.lln.g_min < c.lln.g_max, "lln.g_max",
            "bounds need 0 < g_min < g_max");
    require(c.lln.N >= 1, "lln.N", "must be >= 1");
    l->finish();
  }
  if (auto g = s.child("gap")) {
    c.gap.centers = g->numbers("centers", c.gap.centers);
    c.gap.weights = g->numbers("weights", c.gap.weights);
    c.gap.within_sd = g->number("within_sd", c.gap.within_sd);
    c.gap.N = g->count("N", c.gap.N);
    c.gap.replicates = g->count("replicates", c.gap.replicates);
    c.gap.points = g->count("points", c.gap.points);
    c.gap.x_lo = g->number("x_lo", c.gap.x_lo);
    c.gap.x_hi = g->number("x_hi", c.gap.x_hi);
    c.gap.eta_sizes = g->counts("eta_sizes", c.gap.eta_sizes);
    c.gap.eta_replicates = g->count("eta_replicates", c.gap.eta_replicates);
    try {
      validate_law(GaussianMixtureLaw{c.gap.centers, c.gap.weights, c.gap.within_sd});
    } catch (const std::invalid_argument& e) {
      throw ConfigError("gap.weights", e.what());
    }
    require(c.gap.points >= 1, "gap.points", "must be >= 1");
    require(c.gap.x_lo <= c.gap.x_hi, "gap.x_hi", "needs x_lo <= x_hi");
    check_ascending(c.gap.eta_sizes, "gap.eta_sizes");
    g->finish();
  }
  s.finish();

  return c;
}

json law_json(const InitLaw& law) {
  return std::visit(
      [](const auto& l) -> json {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, GaussianLaw>) {
          return {{"law", "gaussian"}, {"mean", l.mean}, {"sd", l.sd}};
        } else if constexpr (std::is_same_v<T, UniformLaw>) {
          return {{"law", "uniform"}, {"lo", l.lo}, {"hi", l.hi}};
        } else {
          return {{"law", "mixture"},
                  {"centers", l.centers},
                  {"weights", l.weights},
                  {"within_sd", l.within_sd}};
        }
      },
      law);
}

json to_json(const ExperimentConfig& c) {
  json lln = {{"g_min", c.lln.g_min},
              {"g_max", c.lln.g_max},
              {"N", c.lln.N},
              {"replicates", c.lln.replicates}};
  if (c.lln.z_half_width) lln["z_half_width"] = *c.lln.z_half_width;
  if (c.lln.y_half_width) lln["y_half_width"] = *c.lln.y_half_width;
  return {
      {"kind", kind_name(c.kind)},
      {"seed", c.seed},
      {"dimension", c.dimension},
      {"objective",
       {{"name", c.objective.name},
        {"value", c.objective.value},
        {"floor", c.objective.floor},
        {"amplitude", c.objective.amplitude},
        {"center", c.objective.center},
        {"width", c.objective.width},
        {"domain", {{"lo", c.objective.domain.lo}, {"hi", c.objective.domain.hi}}}}},
      {"kernel",
       {{"name", c.kernel.name}, {"sigma", c.kernel.sigma}, {"half_width", c.kernel.half_width}}},
      {"recombination", c.recombination},
      {"stack", c.stack},
      {"init", law_json(c.init)},
      {"generations", c.generations},
      {"sizes", c.sizes},
      {"replicates", c.replicates},
      {"particles", c.particles},
      {"grid_bins", c.grid_bins},
      {"ipm_method", c.ipm_method},
      {"tv_bins", c.tv_bins},
      {"output_dir", c.output_dir},
      {"thresholds",
       {{"ks_same_law", c.thresholds.ks_same_law},
        {"ks_final", c.thresholds.ks_final},
        {"exchangeability", c.thresholds.exchangeability},
        {"gap_multiple", c.thresholds.gap_multiple}}},
      {"compare", {{"k", c.compare.k}, {"n", c.compare.n}}},
      {"lln", lln},
      {"gap",
       {{"centers", c.gap.centers},
        {"weights", c.gap.weights},
        {"within_sd", c.gap.within_sd},
        {"N", c.gap.N},
        {"replicates", c.gap.replicates},
        {"points", c.gap.points},
        {"x_lo", c.gap.x_lo},
        {"x_hi", c.gap.x_hi},
        {"eta_sizes", c.gap.eta_sizes},
        {"eta_replicates", c.gap.eta_replicates}}},
  };
}

}  // namespace

std::string_view kind_name(ExperimentKind kind) noexcept {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

ExperimentKind kind_from_name(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (name == n) return k;
  }
  throw ConfigError("kind", "unknown experiment kind '" + std::string(name) +
                                "' (known: simulate, ipm, compare, counterexample, sweep)");
}

ExperimentConfig parse_config_text(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
  }
  return parse_root(root);
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("<file>", "cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string canonical_json(const ExperimentConfig& config, int indent) {
  return to_json(config).dump(indent);
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  json j = to_json(config);
  j.erase("output_dir");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash_hex(const ExperimentConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash(config)));
  return buf;
}

Objective build_objective(const ExperimentConfig& config) {
  const auto& o = config.objective;
  const Box box = Box::cube(config.dimension, o.domain.lo, o.domain.hi);
  if (o.name == "constant") return constant_objective(o.value, box);
  if (o.name == "gaussian_bump") {
    return gaussian_bump_objective(o.floor, o.amplitude, o.center, o.width, box);
  }
  if (o.name == "rastrigin_floor") return rastrigin_floor_objective(o.floor, box);
  throw ConfigError("objective.name", "unknown objective '" + o.name + "'");
}

MutationKernel build_kernel(const KernelConfig& kernel) {
  if (kernel.name == "zero_noise") return MutationKernel::zero_noise();
  if (kernel.name == "gaussian") return MutationKernel::gaussian(kernel.sigma);
  if (kernel.name == "uniform_box") return MutationKernel::uniform_box(kernel.half_width);
  throw ConfigError("kernel.name", "unknown kernel '" + kernel.name + "'");
}

operators::RecombinationLaw build_recombination(const ExperimentConfig& config) {
  if (config.recombination == "mean") return operators::RecombinationLaw::mean_crossover();
  if (config.recombination == "uniform") return operators::RecombinationLaw::uniform_crossover();
  throw ConfigError("recombination", "unknown recombination preset '" + config.recombination + "'");
}

operators::OperatorStack build_stack(const ExperimentConfig& config) {
  std::vector<operators::OperatorDescriptor> ops;
  for (const auto& name : config.stack) {
    if (name == "selection") {
      ops.emplace_back(operators::Selection{});
    } else if (name == "mutation") {
      ops.emplace_back(operators::Mutation{build_kernel(config.kernel)});
    } else if (name == "recombination") {
      ops.emplace_back(operators::Recombination{build_recombination(config)});
    } else {
      throw ConfigError("stack", "unknown operator '" + name + "'");
    }
  }
  return operators::OperatorStack(std::move(ops));
}

}  // namespace ipmlab::harness
