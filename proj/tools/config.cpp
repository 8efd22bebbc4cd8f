#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "hyperlq/errors.hpp"

namespace hyperlq::cli {

namespace {

using nlohmann::json;

std::string Join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Reads one JSON object, remembers the keys it consumed and rejects the rest.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string path(const std::string& key) const { return Join(path_, key); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) throw ConfigError(path(key), "required field is missing");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(path(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(path(key), "must be finite");
    return x;
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : mark(key, fallback); }

  // Number or the string "inf".
  double exponent(const std::string& key) {
    const json& v = raw(key);
    if (v.is_string() && v.get<std::string>() == "inf") return kInfinity;
    if (!v.is_number()) throw ConfigError(path(key), "expected a positive number or \"inf\"");
    const double x = v.get<double>();
    if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(path(key), "must be positive");
    return x;
  }

  double positive(const std::string& key) {
    const double x = number(key);
    if (!(x > 0.0)) throw ConfigError(path(key), "must be positive");
    return x;
  }
  double positive(const std::string& key, double fallback) {
    return has(key) ? positive(key) : mark(key, fallback);
  }

  long integer(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(path(key), "expected an integer");
    return v.get<long>();
  }
  long integer(const std::string& key, long fallback) {
    if (!has(key)) {
      used_.insert(key);
      return fallback;
    }
    return integer(key);
  }

  std::string string(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(path(key), "expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) {
      used_.insert(key);
      return fallback;
    }
    return string(key);
  }

  std::string choice(const std::string& key, const std::set<std::string>& allowed,
                     const std::string& fallback) {
    const std::string v = fallback.empty() ? string(key) : string(key, fallback);
    if (!allowed.count(v)) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw ConfigError(path(key), "must be one of {" + list + "}");
    }
    return v;
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) {
      used_.insert(key);
      return fallback;
    }
    const json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(path(key), "expected true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(path(key), "expected an array of numbers");
    std::vector<double> out;
    for (size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(path(key) + "[" + std::to_string(i) + "]", "expected a number");
      const double x = v[i].get<double>();
      if (!std::isfinite(x)) throw ConfigError(path(key) + "[" + std::to_string(i) + "]", "must be finite");
      out.push_back(x);
    }
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError(path(it.key()), "unknown key");
    }
  }

 private:
  double mark(const std::string& key, double v) {
    used_.insert(key);
    return v;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

json ExponentJson(double x) { return std::isinf(x) ? json("inf") : json(x); }

Region ParseRegion(const json& j, const std::string& path) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "full") return Region::Full();
    if (s == "none") return Region::None();
    throw ConfigError(path, "must be \"full\", \"none\" or {\"a\": .., \"b\": ..}");
  }
  Obj o(j, path);
  const double a = o.number("a");
  const double b = o.number("b");
  o.finish();
  if (!(a >= 0.0)) throw ConfigError(Join(path, "a"), "must be >= 0");
  if (!(b <= 3.14159265358979323846 + 1e-12)) throw ConfigError(Join(path, "b"), "must be <= pi");
  if (!(a < b)) throw ConfigError(Join(path, "a"), "a < b required");
  return Region::Subinterval(a, b);
}

json RegionJson(const Region& r) {
  switch (r.kind) {
    case Region::Kind::kNone: return "none";
    case Region::Kind::kFull: return "full";
    default: return json{{"a", r.a}, {"b", r.b}};
  }
}

ModelConfig ParseModel(const json& j, json* resolved) {
  Obj o(j, "model");
  const std::string type =
      o.choice("type", {"interval", "star", "rectangle", "synthetic", "synthetic_exponential"}, "");
  json& r = *resolved;
  r["type"] = type;
  if (type == "interval") {
    IntervalModel m;
    m.n_modes = static_cast<int>(o.integer("n_modes"));
    if (m.n_modes < 1) throw ConfigError("model.n_modes", "must be at least 1");
    m.control = o.has("control") ? ParseRegion(o.raw("control"), "model.control") : Region::Full();
    m.observation =
        o.has("observation") ? ParseRegion(o.raw("observation"), "model.observation") : Region::Full();
    o.finish();
    r["n_modes"] = m.n_modes;
    r["control"] = RegionJson(m.control);
    r["observation"] = RegionJson(m.observation);
    return m;
  }
  if (type == "star") {
    StarModel m;
    m.lengths = o.numbers("lengths");
    if (m.lengths.size() < 2) throw ConfigError("model.lengths", "at least 2 edges required");
    for (size_t i = 0; i < m.lengths.size(); ++i)
      if (!(m.lengths[i] > 0.0))
        throw ConfigError("model.lengths[" + std::to_string(i) + "]", "must be positive");
    const long ne = static_cast<long>(m.lengths.size());
    m.controlled_edge = static_cast<int>(o.integer("controlled_edge", 0));
    m.observed_edge = static_cast<int>(o.integer("observed_edge", 1));
    if (m.controlled_edge < 0 || m.controlled_edge >= ne)
      throw ConfigError("model.controlled_edge", "edge index out of range");
    if (m.observed_edge < 0 || m.observed_edge >= ne)
      throw ConfigError("model.observed_edge", "edge index out of range");
    m.lambda_max = o.positive("lambda_max");
    m.n_control_basis = static_cast<int>(o.integer("n_control_basis", 0));
    if (m.n_control_basis < 0) throw ConfigError("model.n_control_basis", "must be >= 0");
    o.finish();
    r["lengths"] = m.lengths;
    r["controlled_edge"] = m.controlled_edge;
    r["observed_edge"] = m.observed_edge;
    r["lambda_max"] = m.lambda_max;
    r["n_control_basis"] = m.n_control_basis;
    return m;
  }
  if (type == "rectangle") {
    RectangleModel m;
    m.a = o.number("a");
    m.b = o.number("b");
    m.max_frequency = o.positive("max_frequency");
    o.finish();
    if (!(m.a >= 0.0)) throw ConfigError("model.a", "must be >= 0");
    if (!(m.a < m.b)) throw ConfigError("model.a", "a < b required");
    if (!(m.b <= 3.14159265358979323846 + 1e-12)) throw ConfigError("model.b", "must be <= pi");
    r["a"] = m.a;
    r["b"] = m.b;
    r["max_frequency"] = m.max_frequency;
    return m;
  }
  if (type == "synthetic") {
    SyntheticModel m;
    m.rho = o.exponent("rho");
    m.eta = o.exponent("eta");
    if (o.has("spectrum")) {
      m.spectrum = o.numbers("spectrum");
      for (size_t i = 0; i < m.spectrum.size(); ++i) {
        if (!(m.spectrum[i] > 0.0) || (i > 0 && m.spectrum[i] < m.spectrum[i - 1]))
          throw ConfigError("model.spectrum", "must be positive and nondecreasing");
      }
      m.n_modes = static_cast<int>(o.integer("n_modes", static_cast<long>(m.spectrum.size())));
      if (m.n_modes != static_cast<int>(m.spectrum.size()))
        throw ConfigError("model.n_modes", "must equal the length of model.spectrum");
    } else {
      m.n_modes = static_cast<int>(o.integer("n_modes"));
    }
    if (m.n_modes < 1) throw ConfigError("model.n_modes", "must be at least 1");
    o.finish();
    r["rho"] = ExponentJson(m.rho);
    r["eta"] = ExponentJson(m.eta);
    r["n_modes"] = m.n_modes;
    if (!m.spectrum.empty()) r["spectrum"] = m.spectrum;
    return m;
  }
  SyntheticExponentialModel m;
  m.alpha = o.number("alpha");
  m.beta = o.number("beta");
  if (!(m.alpha >= 0.0)) throw ConfigError("model.alpha", "must be >= 0");
  if (!(m.beta >= 0.0)) throw ConfigError("model.beta", "must be >= 0");
  m.n_modes = static_cast<int>(o.integer("n_modes"));
  if (m.n_modes < 1) throw ConfigError("model.n_modes", "must be at least 1");
  o.finish();
  r["alpha"] = m.alpha;
  r["beta"] = m.beta;
  r["n_modes"] = m.n_modes;
  return m;
}

NormScale ParseScale(const json& j, const std::string& path) {
  if (j.is_string() && j.get<std::string>() == "energy") return NormScale::Energy();
  Obj o(j, path);
  const std::string kind = o.choice("kind", {"energy", "graded", "graded_dual", "sobolev_state", "exp_weight"}, "");
  NormScale out = NormScale::Energy();
  if (kind == "graded") out = NormScale::Graded(o.number("s"));
  if (kind == "graded_dual") out = NormScale::GradedDual(o.number("s"));
  if (kind == "sobolev_state") out = NormScale::SobolevState(o.number("beta"));
  if (kind == "exp_weight") {
    const double a = o.number("alpha");
    if (!(a >= 0.0)) throw ConfigError(Join(path, "alpha"), "must be >= 0");
    out = NormScale::ExpWeight(a);
  }
  o.finish();
  return out;
}

json ScaleJson(const NormScale& s) {
  switch (s.kind()) {
    case NormScale::Kind::kGraded: return json{{"kind", "graded"}, {"s", s.parameter()}};
    case NormScale::Kind::kGradedDual: return json{{"kind", "graded_dual"}, {"s", s.parameter()}};
    case NormScale::Kind::kSobolevState: return json{{"kind", "sobolev_state"}, {"beta", s.parameter()}};
    case NormScale::Kind::kExpWeight: return json{{"kind", "exp_weight"}, {"alpha", s.parameter()}};
  }
  return json();
}

const SyntheticModel* AsSynthetic(const ModelConfig& m) { return std::get_if<SyntheticModel>(&m); }

// rho and eta from the experiment block, falling back to a synthetic model.
double ModelExponent(Obj& o, const std::string& key, const ModelConfig& model) {
  if (o.has(key)) return o.exponent(key);
  if (const SyntheticModel* s = AsSynthetic(model)) return key == "rho" ? s->rho : s->eta;
  throw ConfigError(o.path(key), "required unless the model is synthetic");
}

ExperimentConfig ParseExperiment(const json& j, const std::string& path, const ModelConfig& model,
                                 json* resolved, std::string* name) {
  Obj o(j, path);
  const std::string type = o.choice(
      "type", {"observability", "bounds", "decay_collocated", "decay_riccati", "null_control", "turnpike"}, "");
  if (name) *name = o.string("name");
  json& r = *resolved;
  r["type"] = type;
  if (name) r["name"] = *name;
  if (type == "observability") {
    ObservabilityExperiment e;
    e.horizon = o.positive("horizon");
    e.shells = o.numbers("shells");
    if (e.shells.size() < 3) throw ConfigError(o.path("shells"), "at least 3 shells required");
    for (size_t i = 0; i < e.shells.size(); ++i)
      if (!(e.shells[i] > 0.0)) throw ConfigError(o.path("shells"), "shell edges must be positive");
    e.use_control = o.boolean("use_control", true);
    o.finish();
    r["horizon"] = e.horizon;
    r["shells"] = e.shells;
    r["use_control"] = e.use_control;
    return e;
  }
  if (type == "bounds") {
    BoundsExperiment e;
    e.method = o.choice("method", {"dre_limit", "newton_kleinman"}, "dre_limit");
    if (o.has("weak")) {
      e.weak = ParseScale(o.raw("weak"), o.path("weak"));
    } else if (const SyntheticModel* s = AsSynthetic(model)) {
      e.weak = NormScale::Graded(std::isinf(s->eta) ? 0.0 : -1.0 / s->eta);
    } else {
      throw ConfigError(o.path("weak"), "required unless the model is synthetic");
    }
    if (o.has("strong")) {
      e.strong = ParseScale(o.raw("strong"), o.path("strong"));
    } else if (const SyntheticModel* s = AsSynthetic(model)) {
      e.strong = NormScale::Graded(std::isinf(s->rho) ? 0.0 : 1.0 / s->rho);
    } else {
      throw ConfigError(o.path("strong"), "required unless the model is synthetic");
    }
    e.n_random_probes = static_cast<int>(o.integer("n_random_probes", 200));
    if (e.n_random_probes < 100) throw ConfigError(o.path("n_random_probes"), "at least 100 random probes required");
    o.finish();
    r["method"] = e.method;
    r["weak"] = ScaleJson(e.weak);
    r["strong"] = ScaleJson(e.strong);
    r["n_random_probes"] = e.n_random_probes;
    return e;
  }
  if (type == "decay_collocated" || type == "decay_riccati") {
    DecayExperiment e;
    e.riccati = type == "decay_riccati";
    e.horizon = o.positive("horizon");
    e.dt = o.positive("dt", 0.25);
    e.eps = o.positive("eps", 0.1);
    e.integrator = o.choice("integrator", {"exact", "strang"}, "exact");
    if (e.riccati) {
      e.method = o.choice("method", {"dre_limit", "newton_kleinman"}, "dre_limit");
      e.s = o.positive("s", 1.0);
      if (o.has("data_exponent")) {
        e.data_exponent = o.positive("data_exponent");
      } else {
        const double rho = ModelExponent(o, "rho", model);
        const double eta = ModelExponent(o, "eta", model);
        const double sigma = 1.0 / rho + 1.0 / eta + e.s;
        e.data_exponent = sigma + 0.5 + e.eps;
      }
    } else {
      e.k = o.positive("k", 1.0);
      e.data_exponent = o.has("data_exponent") ? o.positive("data_exponent") : e.k + 0.5 + e.eps;
    }
    if (o.has("window")) {
      const std::vector<double> w = o.numbers("window");
      if (w.size() != 2 || !(w[0] >= 0.0) || !(w[1] > w[0]))
        throw ConfigError(o.path("window"), "expected [t_start, t_end] with 0 <= t_start < t_end");
      if (w[1] > e.horizon) throw ConfigError(o.path("window"), "window must end inside the horizon");
      e.window = std::make_pair(w[0], w[1]);
    }
    if (o.has("norm")) e.norm = ParseScale(o.raw("norm"), o.path("norm"));
    o.finish();
    r["horizon"] = e.horizon;
    r["dt"] = e.dt;
    r["eps"] = e.eps;
    r["integrator"] = e.integrator;
    r["data_exponent"] = e.data_exponent;
    if (e.riccati) {
      r["method"] = e.method;
      r["s"] = e.s;
    } else {
      r["k"] = e.k;
    }
    r["window"] = e.window ? json{e.window->first, e.window->second} : json("default");
    r["norm"] = ScaleJson(e.norm);
    return e;
  }
  if (type == "null_control") {
    NullControlExperiment e;
    e.t0 = o.positive("t0");
    e.n_samples = static_cast<int>(o.integer("n_samples", 0));
    if (e.n_samples != 0 && e.n_samples < 3) throw ConfigError(o.path("n_samples"), "must be 0 (automatic) or >= 3");
    e.data_exponent = o.positive("data_exponent", 1.0);
    o.finish();
    r["t0"] = e.t0;
    r["n_samples"] = e.n_samples;
    r["data_exponent"] = e.data_exponent;
    return e;
  }
  TurnpikeExperiment e;
  e.horizons = o.numbers("horizons");
  if (e.horizons.empty()) throw ConfigError(o.path("horizons"), "at least one horizon required");
  for (size_t i = 0; i < e.horizons.size(); ++i) {
    if (!(e.horizons[i] > 0.0) || (i > 0 && !(e.horizons[i] > e.horizons[i - 1])))
      throw ConfigError(o.path("horizons"), "horizons must be positive and increasing");
  }
  if (o.has("z")) {
    const json& zj = o.raw("z");
    if (zj.is_array()) {
      e.z = o.numbers("z");
    } else {
      Obj zo(zj, o.path("z"));
      e.z_exponent = zo.number("exponent");
      e.z_scale = zo.number("scale", 1.0);
      zo.finish();
    }
  }
  e.k = o.positive("k", 1.0);
  e.ktilde = o.positive("ktilde", 1.0);
  if (e.ktilde < 1.0) throw ConfigError(o.path("ktilde"), "must be >= 1");
  e.data_exponent = o.has("data_exponent") ? o.positive("data_exponent") : e.k + 0.5 + 0.1;
  e.rho = ModelExponent(o, "rho", model);
  e.eta = ModelExponent(o, "eta", model);
  e.dt = o.has("dt") ? o.positive("dt") : 0.0;
  o.finish();
  r["horizons"] = e.horizons;
  r["z"] = e.z.empty() ? json{{"exponent", e.z_exponent}, {"scale", e.z_scale}} : json(e.z);
  r["k"] = e.k;
  r["ktilde"] = e.ktilde;
  r["data_exponent"] = e.data_exponent;
  r["rho"] = ExponentJson(e.rho);
  r["eta"] = ExponentJson(e.eta);
  r["dt"] = e.dt;
  return e;
}

}  // namespace

RunConfig ParseConfig(const nlohmann::json& doc) {
  Obj o(doc, "");
  RunConfig c;
  c.name = o.string("name", "run");
  if (o.has("seed")) {
    const json& s = o.raw("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      throw ConfigError("seed", "expected a nonnegative integer");
    c.seed = s.get<std::uint64_t>();
  }
  c.output_dir = o.string("output_dir", "");
  json resolved;
  resolved["name"] = c.name;
  resolved["seed"] = c.seed;
  resolved["output_dir"] = c.output_dir;
  json model_json;
  c.model = ParseModel(o.raw("model"), &model_json);
  resolved["model"] = model_json;

  const bool single = o.has("experiment");
  const bool many = o.has("experiments");
  if (single == many) throw ConfigError("experiment", "exactly one of \"experiment\" or \"experiments\" is required");
  if (single) {
    json e;
    c.items.push_back({"", ParseExperiment(o.raw("experiment"), "experiment", c.model, &e, nullptr)});
    resolved["experiment"] = e;
  } else {
    const json& arr = o.raw("experiments");
    if (!arr.is_array() || arr.empty()) throw ConfigError("experiments", "expected a nonempty array");
    std::set<std::string> names;
    json list = json::array();
    for (size_t i = 0; i < arr.size(); ++i) {
      const std::string path = "experiments[" + std::to_string(i) + "]";
      json e;
      std::string name;
      ExperimentConfig ex = ParseExperiment(arr[i], path, c.model, &e, &name);
      if (name.empty() || name.find_first_of("/\\") != std::string::npos || name == "." || name == "..")
        throw ConfigError(path + ".name", "must be a plain directory name");
      if (!names.insert(name).second) throw ConfigError(path + ".name", "duplicate experiment name");
      c.items.push_back({name, std::move(ex)});
      list.push_back(e);
    }
    resolved["experiments"] = list;
  }
  o.finish();
  c.resolved = resolved;
  return c;
}

RunConfig LoadConfig(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("", "cannot read config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string text = ss.str();
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    size_t line = 1, col = 1;
    for (size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("", path + ":" + std::to_string(line) + ":" + std::to_string(col) +
                              ": JSON syntax error");
  }
  return ParseConfig(doc);
}

std::string ExperimentKind(const ExperimentConfig& e) {
  struct Visitor {
    std::string operator()(const ObservabilityExperiment&) const { return "observability"; }
    std::string operator()(const BoundsExperiment&) const { return "bounds"; }
    std::string operator()(const DecayExperiment& d) const {
      return d.riccati ? "decay_riccati" : "decay_collocated";
    }
    std::string operator()(const NullControlExperiment&) const { return "null_control"; }
    std::string operator()(const TurnpikeExperiment&) const { return "turnpike"; }
  };
  return std::visit(Visitor{}, e);
}

SpectralSystem BuildModel(const ModelConfig& model) {
  struct Visitor {
    SpectralSystem operator()(const IntervalModel& m) const {
      return build_interval_wave(m.n_modes, m.control, m.observation);
    }
    SpectralSystem operator()(const StarModel& m) const {
      return build_star_network(m.lengths, m.controlled_edge, m.observed_edge, m.lambda_max,
                                m.n_control_basis);
    }
    SpectralSystem operator()(const RectangleModel& m) const {
      return build_rectangle(m.a, m.b, m.max_frequency);
    }
    SpectralSystem operator()(const SyntheticModel& m) const {
      Vec spec;
      if (!m.spectrum.empty()) spec = Eigen::Map<const Vec>(m.spectrum.data(), m.spectrum.size());
      return build_synthetic(m.rho, m.eta, m.n_modes, spec);
    }
    SpectralSystem operator()(const SyntheticExponentialModel& m) const {
      return build_synthetic_exponential(m.alpha, m.beta, m.n_modes);
    }
  };
  return std::visit(Visitor{}, model);
}

}  // namespace hyperlq::cli
