#include "fracross/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "fracross/errors.hpp"
#include "fracross/snapshot.hpp"

namespace fracross {

namespace {

struct Entry {
  std::string value;
  std::size_t line = 0;
};

using Section = std::map<std::string, Entry>;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"model", {"n", "d", "alpha", "beta", "sigma", "A", "pi", "m"}},
      {"scheme",
       {"N", "L", "dt", "T", "kappa", "eps", "rho", "dealias", "positivity", "snapshot_every", "adaptive_dt", "cfl",
        "production"}},
      {"initial", {"profile", "centers", "widths", "masses", "values", "path"}},
      {"particles",
       {"count", "dt", "T", "delta", "delta_scale", "bandwidth", "convention", "snapshot_every", "seed"}},
      {"output", {"dir"}},
      {"sweep", {"parameter", "ladder", "start", "ratio", "rungs", "jobs"}},
  };
  return keys;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

class Document {
 public:
  void set(const std::string& section, const std::string& key, Entry e, bool allow_replace) {
    const auto& keys = known_keys();
    auto it = keys.find(section);
    if (it == keys.end()) throw ParseError(e.line, "unknown section [" + section + "]");
    if (!it->second.count(key)) throw ParseError(e.line, "unknown key '" + key + "' in [" + section + "]");
    auto& sec = sections_[section];
    if (!allow_replace && sec.count(key)) throw ParseError(e.line, "duplicate key '" + key + "' in [" + section + "]");
    sec[key] = std::move(e);
  }

  const Entry* find(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }

 private:
  std::map<std::string, Section> sections_;
};

double to_double(const Entry& e, const std::string& key) {
  const std::string v = trim(e.value);
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || v.empty())
    throw ParseError(e.line, "'" + key + "' expects a number, got '" + v + "'");
  return out;
}

double to_double_in(const std::string& text, std::size_t line, const std::string& key) {
  return to_double(Entry{text, line}, key);
}

long long to_integer(const Entry& e, const std::string& key) {
  const std::string v = trim(e.value);
  long long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || v.empty())
    throw ParseError(e.line, "'" + key + "' expects an integer, got '" + v + "'");
  return out;
}

bool to_bool(const Entry& e, const std::string& key) {
  const std::string v = trim(e.value);
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw ParseError(e.line, "'" + key + "' expects true or false, got '" + v + "'");
}

std::vector<double> to_list(const Entry& e, const std::string& key) {
  std::vector<double> out;
  for (const std::string& item : split(e.value, ',')) out.push_back(to_double_in(item, e.line, key));
  return out;
}

// Per-species list; a single value is broadcast to all species.
std::vector<double> species_list(const Entry& e, const std::string& key, int n) {
  auto v = to_list(e, key);
  if (v.size() == 1) v.assign(static_cast<std::size_t>(n), v.front());
  if (v.size() != static_cast<std::size_t>(n))
    throw ParseError(e.line, "'" + key + "' needs 1 or " + std::to_string(n) + " values");
  return v;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string join(const std::vector<double>& v, const char* sep = ", ") {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + fmt(v[i]);
  return out;
}

Document read_document(const std::string& text, const std::vector<std::string>& overrides) {
  Document doc;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (!known_keys().count(section)) throw ParseError(line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected 'key = value', got '" + line + "'");
    if (section.empty()) throw ParseError(line_no, "key outside of any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "empty key");
    doc.set(section, key, Entry{value, line_no}, false);
  }
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    const auto dot = o.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
      throw ParseError(0, "override '" + o + "' is not of the form section.key=value");
    doc.set(trim(o.substr(0, dot)), trim(o.substr(dot + 1, eq - dot - 1)), Entry{trim(o.substr(eq + 1)), 0}, true);
  }
  return doc;
}

Matrix parse_matrix(const Entry& e, int n) {
  std::vector<double> data;
  const auto rows = split(e.value, ';');
  for (const std::string& row : rows) {
    const auto cols = split(row, ',');
    if (static_cast<int>(cols.size()) != n || static_cast<int>(rows.size()) != n)
      throw ParseError(e.line, "A must be " + std::to_string(n) + "x" + std::to_string(n) +
                                   " (rows separated by ';', entries by ',')");
    for (const std::string& c : cols) data.push_back(to_double_in(c, e.line, "A"));
  }
  return Matrix(n, std::move(data));
}

void throw_violations(const std::vector<Violation>& v) {
  if (v.empty()) return;
  std::string msg = "invalid configuration:";
  for (const Violation& x : v) msg += " " + x.what + ";";
  throw ValidationError(msg);
}

}  // namespace

std::string to_string(InitialProfile p) {
  switch (p) {
    case InitialProfile::GaussianBumps: return "gaussian-bumps";
    case InitialProfile::Constant: return "constant";
    case InitialProfile::FromSnapshot: return "from-snapshot";
  }
  return "?";
}

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
  const Document doc = read_document(text, overrides);
  RunConfig c;
  auto get = [&](const char* section, const char* key) { return doc.find(section, key); };

  // [model]
  SystemSpec& s = c.spec;
  const Entry* a_entry = get("model", "A");
  if (const Entry* e = get("model", "n")) {
    s.n = static_cast<int>(to_integer(*e, "n"));
  } else if (a_entry) {
    s.n = static_cast<int>(split(a_entry->value, ';').size());
  }
  if (s.n < 1) throw ParseError(get("model", "n") ? get("model", "n")->line : 0, "n must be at least 1");
  if (const Entry* e = get("model", "d")) s.d = static_cast<int>(to_integer(*e, "d"));
  if (s.d < 1 || s.d > 3) throw ParseError(get("model", "d") ? get("model", "d")->line : 0, "d must be 1, 2 or 3");
  if (const Entry* e = get("model", "alpha")) s.alpha = to_double(*e, "alpha");
  if (const Entry* e = get("model", "beta")) s.beta = to_double(*e, "beta");
  if (const Entry* e = get("model", "m")) s.m = to_double(*e, "m");
  s.sigma.assign(static_cast<std::size_t>(s.n), 1.0);
  if (const Entry* e = get("model", "sigma")) s.sigma = species_list(*e, "sigma", s.n);
  s.A = a_entry ? parse_matrix(*a_entry, s.n) : Matrix::identity(s.n);
  if (const Entry* e = get("model", "pi")) {
    s.pi = species_list(*e, "pi", s.n);
    c.pi_from_config = true;
  }

  // [scheme]
  SchemeParams& p = c.scheme;
  if (const Entry* e = get("scheme", "N")) c.grid_points = static_cast<int>(to_integer(*e, "N"));
  if (const Entry* e = get("scheme", "L")) c.half_length = to_double(*e, "L");
  if (const Entry* e = get("scheme", "dt")) p.dt = to_double(*e, "dt");
  if (const Entry* e = get("scheme", "T")) p.T = to_double(*e, "T");
  if (const Entry* e = get("scheme", "kappa")) p.kappa = to_double(*e, "kappa");
  if (const Entry* e = get("scheme", "eps")) p.eps = to_double(*e, "eps");
  if (const Entry* e = get("scheme", "rho")) p.rho = to_double(*e, "rho");
  if (const Entry* e = get("scheme", "dealias")) p.dealias = to_bool(*e, "dealias");
  if (const Entry* e = get("scheme", "adaptive_dt")) p.adaptive_dt = to_bool(*e, "adaptive_dt");
  if (const Entry* e = get("scheme", "cfl")) p.cfl = to_double(*e, "cfl");
  if (const Entry* e = get("scheme", "snapshot_every"))
    p.snapshot_every = static_cast<int>(to_integer(*e, "snapshot_every"));
  if (const Entry* e = get("scheme", "positivity")) {
    if (e->value == "monitor") p.positivity = PositivityPolicy::Monitor;
    else if (e->value == "clamp") p.positivity = PositivityPolicy::Clamp;
    else throw ParseError(e->line, "positivity must be monitor or clamp");
  }
  if (const Entry* e = get("scheme", "production")) {
    if (e->value == "step-start") p.production = ProductionStamp::StepStart;
    else if (e->value == "midpoint") p.production = ProductionStamp::Midpoint;
    else throw ParseError(e->line, "production must be step-start or midpoint");
  }
  try {
    (void)c.grid();
    validate_params(p);
  } catch (const std::invalid_argument& ex) {
    throw ValidationError(std::string("invalid scheme: ") + ex.what());
  }

  // [initial]
  InitialCondition& ic = c.initial;
  if (const Entry* e = get("initial", "profile")) {
    if (e->value == "gaussian-bumps") ic.profile = InitialProfile::GaussianBumps;
    else if (e->value == "constant") ic.profile = InitialProfile::Constant;
    else if (e->value == "from-snapshot") ic.profile = InitialProfile::FromSnapshot;
    else throw ParseError(e->line, "profile must be gaussian-bumps, constant or from-snapshot");
  }
  const std::size_t n = static_cast<std::size_t>(s.n);
  const double L = c.half_length;
  if (const Entry* e = get("initial", "centers")) {
    const auto groups = split(e->value, ';');
    if (groups.size() != n) throw ParseError(e->line, "centers needs one entry per species, separated by ';'");
    for (const std::string& g : groups) {
      std::vector<double> x;
      for (const std::string& item : split(g, ',')) x.push_back(to_double_in(item, e->line, "centers"));
      if (static_cast<int>(x.size()) != s.d) throw ParseError(e->line, "each center needs d coordinates");
      ic.centers.push_back(std::move(x));
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const double x = n == 1 ? 0.0 : L * (-0.4 + 0.8 * static_cast<double>(i) / static_cast<double>(n - 1));
      ic.centers.push_back(std::vector<double>(static_cast<std::size_t>(s.d), 0.0));
      ic.centers.back()[0] = x;
    }
  }
  ic.widths.assign(n, L / 8.0);
  if (const Entry* e = get("initial", "widths")) ic.widths = species_list(*e, "widths", s.n);
  ic.masses.assign(n, 1.0);
  if (const Entry* e = get("initial", "masses")) ic.masses = species_list(*e, "masses", s.n);
  ic.values.assign(n, 1.0);
  if (const Entry* e = get("initial", "values")) ic.values = species_list(*e, "values", s.n);
  for (std::size_t i = 0; i < n; ++i)
    if (!(ic.widths[i] > 0.0)) throw ValidationError("initial widths must be positive");
  if (const Entry* e = get("initial", "path")) {
    ic.path = e->value;
    if (ic.profile == InitialProfile::FromSnapshot && !std::filesystem::exists(ic.path))
      throw ParseError(e->line, "snapshot path '" + e->value + "' does not exist");
  } else if (ic.profile == InitialProfile::FromSnapshot) {
    throw ParseError(0, "profile from-snapshot requires [initial] path");
  }

  // [particles]
  ParticleSettings& ps = c.particles;
  ps.count.assign(n, 1000);
  if (const Entry* e = get("particles", "count")) {
    ps.count.clear();
    for (double v : species_list(*e, "count", s.n)) {
      if (!(v >= 1.0) || v != std::floor(v)) throw ParseError(e->line, "count must be a positive integer");
      ps.count.push_back(static_cast<std::size_t>(v));
    }
  }
  if (const Entry* e = get("particles", "dt")) ps.dt = to_double(*e, "dt");
  if (const Entry* e = get("particles", "T")) ps.T = to_double(*e, "T");
  if (const Entry* e = get("particles", "delta")) ps.delta = to_double(*e, "delta");
  if (const Entry* e = get("particles", "delta_scale")) ps.delta_scale = to_double(*e, "delta_scale");
  if (const Entry* e = get("particles", "bandwidth")) ps.bandwidth = to_double(*e, "bandwidth");
  if (const Entry* e = get("particles", "snapshot_every"))
    ps.snapshot_every = static_cast<int>(to_integer(*e, "snapshot_every"));
  if (const Entry* e = get("particles", "convention")) {
    try {
      ps.convention = levy_convention_from_string(e->value);
    } catch (const std::invalid_argument& ex) {
      throw ParseError(e->line, ex.what());
    }
  }
  if (const Entry* e = get("particles", "seed")) {
    const std::string v = trim(e->value);
    std::uint64_t seed = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), seed);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size() || v.empty())
      throw ParseError(e->line, "seed must be an unsigned 64-bit integer");
    c.seed = seed;
  }
  if (!(ps.dt > 0.0) || ps.snapshot_every < 1 || !(ps.bandwidth >= 0.0))
    throw ValidationError("particles: need dt > 0, snapshot_every >= 1 and bandwidth >= 0");

  // [output]
  if (const Entry* e = get("output", "dir")) c.output_dir = e->value;

  // [sweep]
  SweepSettings& sw = c.sweep;
  if (const Entry* e = get("sweep", "parameter")) {
    sw.parameter = e->value;
    if (sw.parameter != "eps" && sw.parameter != "rho" && sw.parameter != "kappa" && sw.parameter != "dt")
      throw ParseError(e->line, "sweep parameter must be eps, rho, kappa or dt");
  }
  if (const Entry* e = get("sweep", "ladder")) {
    sw.ladder = to_list(*e, "ladder");
  } else if (const Entry* e = get("sweep", "start")) {
    const double start = to_double(*e, "start");
    const Entry* r = get("sweep", "ratio");
    const Entry* k = get("sweep", "rungs");
    const double ratio = r ? to_double(*r, "ratio") : 0.5;
    const long long rungs = k ? to_integer(*k, "rungs") : 4;
    for (long long i = 0; i < rungs; ++i) sw.ladder.push_back(start * std::pow(ratio, static_cast<double>(i)));
  }
  if (const Entry* e = get("sweep", "jobs")) sw.jobs = static_cast<int>(to_integer(*e, "jobs"));

  // Model validation and invariant measure.
  throw_violations(validate_spec(s));
  if (!s.pi) {
    try {
      s.pi = find_invariant_measure(s.A).pi;
    } catch (const NoInvariantMeasure&) {
      s.pi.reset();
    }
  }
  throw_violations(validate_system(s, initial_state(c)));
  return c;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

std::string render_config(const RunConfig& c) {
  const SystemSpec& s = c.spec;
  std::ostringstream os;
  os << "[model]\n";
  os << "n = " << s.n << "\nd = " << s.d << "\nalpha = " << fmt(s.alpha) << "\nbeta = " << fmt(s.beta) << "\n";
  os << "sigma = " << join(s.sigma) << "\n";
  os << "A = ";
  for (int i = 0; i < s.n; ++i) {
    std::vector<double> row;
    for (int j = 0; j < s.n; ++j) row.push_back(s.A(i, j));
    os << (i ? "; " : "") << join(row);
  }
  os << "\n";
  if (s.pi && c.pi_from_config) os << "pi = " << join(*s.pi) << "\n";
  os << "m = " << fmt(s.m) << "\n\n";

  const SchemeParams& p = c.scheme;
  os << "[scheme]\n";
  os << "N = " << c.grid_points << "\nL = " << fmt(c.half_length) << "\ndt = " << fmt(p.dt) << "\nT = " << fmt(p.T)
     << "\nkappa = " << fmt(p.kappa) << "\neps = " << fmt(p.eps) << "\nrho = " << fmt(p.rho)
     << "\ndealias = " << (p.dealias ? "true" : "false")
     << "\npositivity = " << (p.positivity == PositivityPolicy::Clamp ? "clamp" : "monitor")
     << "\nsnapshot_every = " << p.snapshot_every << "\nadaptive_dt = " << (p.adaptive_dt ? "true" : "false")
     << "\ncfl = " << fmt(p.cfl)
     << "\nproduction = " << (p.production == ProductionStamp::Midpoint ? "midpoint" : "step-start") << "\n\n";

  const InitialCondition& ic = c.initial;
  os << "[initial]\nprofile = " << to_string(ic.profile) << "\ncenters = ";
  for (std::size_t i = 0; i < ic.centers.size(); ++i) os << (i ? "; " : "") << join(ic.centers[i]);
  os << "\nwidths = " << join(ic.widths) << "\nmasses = " << join(ic.masses) << "\nvalues = " << join(ic.values)
     << "\n";
  if (!ic.path.empty()) os << "path = " << ic.path.string() << "\n";
  os << "\n";

  const ParticleSettings& ps = c.particles;
  os << "[particles]\ncount = ";
  for (std::size_t i = 0; i < ps.count.size(); ++i) os << (i ? ", " : "") << ps.count[i];
  os << "\ndt = " << fmt(ps.dt) << "\n";
  if (ps.T) os << "T = " << fmt(*ps.T) << "\n";
  if (ps.delta) os << "delta = " << fmt(*ps.delta) << "\n";
  os << "delta_scale = " << fmt(ps.delta_scale) << "\nbandwidth = " << fmt(ps.bandwidth)
     << "\nconvention = " << to_string(ps.convention) << "\nsnapshot_every = " << ps.snapshot_every << "\n";
  if (c.seed) os << "seed = " << *c.seed << "\n";
  os << "\n[output]\ndir = " << c.output_dir.string() << "\n\n";

  os << "[sweep]\nparameter = " << c.sweep.parameter << "\n";
  if (!c.sweep.ladder.empty()) os << "ladder = " << join(c.sweep.ladder) << "\n";
  os << "jobs = " << c.sweep.jobs << "\n";
  return os.str();
}

std::vector<ScalarField> initial_state(const RunConfig& c) {
  const PeriodicGrid g = c.grid();
  const InitialCondition& ic = c.initial;
  const int n = c.spec.n;
  std::vector<ScalarField> u;
  switch (ic.profile) {
    case InitialProfile::Constant:
      for (int i = 0; i < n; ++i) u.emplace_back(g, ic.values.at(i));
      break;
    case InitialProfile::GaussianBumps:
      for (int i = 0; i < n; ++i) {
        ScalarField f(g);
        const double w = ic.widths.at(i);
        const double norm = ic.masses.at(i) / std::pow(std::sqrt(2.0 * std::numbers::pi) * w, g.dim());
        for (std::size_t x = 0; x < g.size(); ++x) {
          // Minimum-image distance so bumps near the edge stay periodic.
          double r2 = 0.0;
          for (int a = 0; a < g.dim(); ++a) {
            double y = g.coordinate(x, a) - ic.centers.at(i).at(a);
            y -= 2.0 * g.half_length() * std::nearbyint(y / (2.0 * g.half_length()));
            r2 += y * y;
          }
          f[x] = norm * std::exp(-0.5 * r2 / (w * w));
        }
        u.push_back(std::move(f));
      }
      break;
    case InitialProfile::FromSnapshot: {
      Snapshot snap = read_snapshot(ic.path);
      if (static_cast<int>(snap.fields.size()) != n)
        throw ValidationError("snapshot species count does not match n");
      if (!(snap.fields.front().grid == g)) throw ValidationError("snapshot grid does not match [scheme] N, L and d");
      u = std::move(snap.fields);
      break;
    }
  }
  return u;
}

}  // namespace fracross
