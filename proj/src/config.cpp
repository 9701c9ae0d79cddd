#include "kchem/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "kchem/error.hpp"
#include "kchem/signal.hpp"

namespace kchem {

char const* to_string(ErrorCode code)
{
  switch (code)
  {
    case ErrorCode::missing_field: return "MISSING_FIELD";
    case ErrorCode::kernel_normalization: return "KERNEL_NORMALIZATION";
    case ErrorCode::positivity: return "POSITIVITY";
    case ErrorCode::support_too_wide: return "SUPPORT_TOO_WIDE";
    case ErrorCode::parse_error: return "PARSE_ERROR";
    case ErrorCode::invalid_value: return "INVALID_VALUE";
  }
  return "UNKNOWN";
}

namespace {

std::string describe(std::vector<ConfigIssue> const& issues)
{
  std::string s;
  for (auto const& i : issues)
  {
    if (!s.empty())
      s += "; ";
    s += std::string(to_string(i.code)) + " " + i.field + ": " + i.reason;
  }
  return s;
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : std::runtime_error(describe(issues)), issues_(std::move(issues))
{
}

char const* to_string(RunMode mode)
{
  switch (mode)
  {
    case RunMode::kinetic: return "kinetic";
    case RunMode::agent: return "agent";
    case RunMode::compare: return "compare";
    case RunMode::monitor: return "monitor";
  }
  return "?";
}

char const* to_string(SignalMode mode)
{
  return mode == SignalMode::elliptic ? "elliptic" : "parabolic";
}

std::string fnv1a_hex(std::string const& data)
{
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data)
  {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

//---------------------------------------------------------------------------//
double InitialData::x_half_support() const
{
  switch (x_shape)
  {
    case Shape::gaussian: return 4.0 * x_width;
    case Shape::box: return 0.5 * x_width;
    case Shape::uniform: return HUGE_VAL;
  }
  return HUGE_VAL;
}

YBox InitialData::y_support() const
{
  YBox b;
  for (std::size_t d = 0; d < 2; ++d)
  {
    double const half = y_shape == Shape::gaussian ? 4.0 * y_width[d] : 0.5 * y_width[d];
    b.lo[d] = y_center[d] - half;
    b.hi[d] = y_center[d] + half;
  }
  return b;
}

//---------------------------------------------------------------------------//
namespace {

std::string trim(std::string const& s)
{
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
    ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
    --e;
  return s.substr(b, e - b);
}

struct Entry {
  std::string raw;
  bool is_array = false;
  std::vector<std::string> items;
  int line = 0;
  bool used = false;
};

class Document {
 public:
  std::map<std::string, Entry> entries;
  std::vector<ConfigIssue> issues;

  void parse(std::string const& text)
  {
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line))
    {
      ++lineno;
      line = trim(strip_comment(line));
      if (line.empty())
        continue;
      if (line.front() == '[')
      {
        if (line.back() != ']' || line.size() < 3)
        {
          fail(lineno, "malformed section header");
          continue;
        }
        section = trim(line.substr(1, line.size() - 2));
        if (!valid_name(section))
          fail(lineno, "invalid section name '" + section + "'");
        continue;
      }
      auto const eq = line.find('=');
      if (eq == std::string::npos)
      {
        fail(lineno, "expected 'key = value'");
        continue;
      }
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (!valid_name(key))
      {
        fail(lineno, "invalid key '" + key + "'");
        continue;
      }
      int const start = lineno;
      if (!value.empty() && value.front() == '[')
      {
        while (value.find(']') == std::string::npos && std::getline(in, line))
        {
          ++lineno;
          value += " " + trim(strip_comment(line));
        }
      }
      set(section.empty() ? key : section + "." + key, value, start);
    }
  }

  void set(std::string const& key, std::string const& value, int line, bool override_existing = false)
  {
    if (!override_existing && entries.count(key) != 0)
    {
      issues.push_back({ErrorCode::parse_error, key, "duplicate key at line " + std::to_string(line)});
      return;
    }
    Entry e;
    e.raw = value;
    e.line = line;
    if (!value.empty() && value.front() == '[')
    {
      e.is_array = true;
      if (value.back() != ']')
      {
        issues.push_back({ErrorCode::parse_error, key, "unterminated array"});
        return;
      }
      std::string inner = value.substr(1, value.size() - 2);
      std::istringstream items(inner);
      std::string item;
      while (std::getline(items, item, ','))
      {
        item = trim(item);
        if (!item.empty())
          e.items.push_back(item);
      }
    }
    else if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
    {
      e.raw = value.substr(1, value.size() - 2);
    }
    entries[key] = e;
  }

  Entry* find(std::string const& key)
  {
    auto it = entries.find(key);
    if (it == entries.end())
      return nullptr;
    it->second.used = true;
    return &it->second;
  }

  bool has(std::string const& key) const { return entries.count(key) != 0; }

  static bool to_double(std::string const& s, double& out)
  {
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return !s.empty() && end == s.c_str() + s.size() && std::isfinite(out);
  }

  double number(std::string const& key, double fallback, bool required = false)
  {
    Entry* e = find(key);
    if (e == nullptr)
    {
      if (required)
        issues.push_back({ErrorCode::missing_field, key, "required"});
      return fallback;
    }
    double v;
    if (e->is_array || !to_double(e->raw, v))
    {
      issues.push_back({ErrorCode::parse_error, key, "expected a finite number, got '" + e->raw + "'"});
      return fallback;
    }
    return v;
  }

  std::size_t count(std::string const& key, std::size_t fallback, bool required = false)
  {
    double const v = number(key, static_cast<double>(fallback), required);
    if (v < 0.0 || v != std::floor(v))
    {
      issues.push_back({ErrorCode::invalid_value, key, "expected a nonnegative integer"});
      return fallback;
    }
    return static_cast<std::size_t>(v);
  }

  std::string word(std::string const& key, std::string fallback, bool required = false)
  {
    Entry* e = find(key);
    if (e == nullptr)
    {
      if (required)
        issues.push_back({ErrorCode::missing_field, key, "required"});
      return fallback;
    }
    if (e->is_array)
    {
      issues.push_back({ErrorCode::parse_error, key, "expected a word"});
      return fallback;
    }
    return e->raw;
  }

  bool boolean(std::string const& key, bool fallback)
  {
    std::string const w = word(key, fallback ? "true" : "false");
    if (w == "true")
      return true;
    if (w == "false")
      return false;
    issues.push_back({ErrorCode::invalid_value, key, "expected true or false"});
    return fallback;
  }

  std::vector<double> array(std::string const& key, std::vector<double> fallback, bool required = false)
  {
    Entry* e = find(key);
    if (e == nullptr)
    {
      if (required)
        issues.push_back({ErrorCode::missing_field, key, "required"});
      return fallback;
    }
    std::vector<std::string> items = e->is_array ? e->items : std::vector<std::string>{e->raw};
    std::vector<double> out;
    for (auto const& it : items)
    {
      double v;
      if (!to_double(it, v))
      {
        issues.push_back({ErrorCode::parse_error, key, "array entry '" + it + "' is not a finite number"});
        return fallback;
      }
      out.push_back(v);
    }
    return out;
  }

  void report_unused()
  {
    for (auto const& [key, e] : entries)
    {
      if (!e.used)
        issues.push_back({ErrorCode::invalid_value, key, "unknown key (line " + std::to_string(e.line) + ")"});
    }
  }

 private:
  static std::string strip_comment(std::string const& line)
  {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i)
    {
      if (line[i] == '"')
        quoted = !quoted;
      else if (line[i] == '#' && !quoted)
        return line.substr(0, i);
    }
    return line;
  }

  static bool valid_name(std::string const& s)
  {
    if (s.empty())
      return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
    });
  }

  void fail(int line, std::string reason)
  {
    issues.push_back({ErrorCode::parse_error, "line " + std::to_string(line), std::move(reason)});
  }
};

GrowthFunction growth_function(Document& doc, std::string const& key, GrowthFunction fallback)
{
  if (doc.has(key + "_table"))
  {
    auto const t = doc.array(key + "_table", {});
    if (t.size() < 2 || t.size() % 2 != 0)
    {
      doc.issues.push_back({ErrorCode::invalid_value, key + "_table", "expected pairs r0, v0, r1, v1, ..."});
      return fallback;
    }
    GrowthFunction f;
    f.kind = GrowthFunction::Kind::table;
    for (std::size_t i = 0; i < t.size(); i += 2)
    {
      if (i > 0 && !(t[i] > t[i - 2]))
        doc.issues.push_back({ErrorCode::invalid_value, key + "_table", "abscissae must increase"});
      f.r.push_back(t[i]);
      f.value.push_back(t[i + 1]);
    }
    return f;
  }
  auto const p = doc.array(key, {fallback.c0, fallback.c1, fallback.exponent});
  if (p.size() != 3)
  {
    doc.issues.push_back({ErrorCode::invalid_value, key, "expected [c0, c1, exponent]"});
    return fallback;
  }
  if (p[0] < 0.0 || p[1] < 0.0 || p[2] < 0.0)
    doc.issues.push_back({ErrorCode::positivity, key, "coefficients and exponent must be nonnegative"});
  return GrowthFunction::power(p[0], p[1], p[2]);
}

Shape shape(Document& doc, std::string const& key, Shape fallback, bool allow_uniform)
{
  std::string const w = doc.word(key, fallback == Shape::gaussian ? "gaussian" : fallback == Shape::box ? "box" : "uniform");
  if (w == "gaussian")
    return Shape::gaussian;
  if (w == "box")
    return Shape::box;
  if (w == "uniform" && allow_uniform)
    return Shape::uniform;
  doc.issues.push_back({ErrorCode::invalid_value, key, "unknown shape '" + w + "'"});
  return fallback;
}

void require_positive(Document& doc, std::string const& key, double v)
{
  if (!(v > 0.0))
    doc.issues.push_back({ErrorCode::positivity, key, "must be positive, got " + std::to_string(v)});
}

//! Inflate a box about its centre and shift y1 so that y1 = 0 is a cell centre.
YBox grid_box(YBox const& tight, double inflation, std::size_t ny1)
{
  YBox g;
  for (std::size_t d = 0; d < 2; ++d)
  {
    double const c = 0.5 * (tight.lo[d] + tight.hi[d]);
    double const w = std::max(tight.hi[d] - tight.lo[d], 1e-3);
    g.lo[d] = c - 0.5 * (1.0 + inflation) * w;
    g.hi[d] = c + 0.5 * (1.0 + inflation) * w;
  }
  double const h1 = (g.hi[0] - g.lo[0]) / static_cast<double>(ny1 - 1);
  double const k = std::ceil(-g.lo[0] / h1 - 0.5);
  g.lo[0] = -(k + 0.5) * h1;
  g.hi[0] = g.lo[0] + h1 * static_cast<double>(ny1);
  return g;
}

}  // namespace

//---------------------------------------------------------------------------//
ScenarioConfig parse_config(std::string const& text, std::vector<std::string> const& overrides,
                            std::string const& origin)
{
  Document doc;
  doc.parse(text);
  for (auto const& o : overrides)
  {
    auto const eq = o.find('=');
    if (eq == std::string::npos)
    {
      doc.issues.push_back({ErrorCode::parse_error, o, "override must be key=value"});
      continue;
    }
    doc.set(trim(o.substr(0, eq)), trim(o.substr(eq + 1)), 0, true);
  }

  ScenarioConfig cfg;
  cfg.source_path = origin;
  std::string hash_input = text;
  for (auto const& o : overrides)
    hash_input += "\n" + o;
  cfg.hash = fnv1a_hex(hash_input);

  // run
  auto& run = cfg.run;
  std::string const mode = doc.word("run.mode", "kinetic");
  if (mode == "kinetic")
    cfg.mode = RunMode::kinetic;
  else if (mode == "agent")
    cfg.mode = RunMode::agent;
  else if (mode == "compare")
    cfg.mode = RunMode::compare;
  else if (mode == "monitor")
    cfg.mode = RunMode::monitor;
  else
    doc.issues.push_back({ErrorCode::invalid_value, "run.mode", "unknown mode '" + mode + "'"});
  std::string const smode = doc.word("run.signal_mode", "elliptic");
  if (smode == "elliptic")
    cfg.signal_mode = SignalMode::elliptic;
  else if (smode == "parabolic")
    cfg.signal_mode = SignalMode::parabolic;
  else
    doc.issues.push_back({ErrorCode::invalid_value, "run.signal_mode", "unknown signal mode '" + smode + "'"});
  run.horizon = doc.number("run.T", 1.0, true);
  run.dt = doc.number("run.dt", 0.01, true);
  run.snapshot_every = doc.count("run.snapshot_every", 100);
  run.monitor_every = doc.count("run.monitor_every", 1);
  run.seed = static_cast<std::uint64_t>(doc.count("run.seed", 1));
  run.workers = static_cast<int>(doc.count("run.workers", 0));
  run.agents = doc.count("run.agents", 10000);
  run.compare_times = doc.array("run.compare_times", {});
  run.agent_feedback = doc.boolean("run.agent_feedback", true);
  run.trajectory_dump = doc.count("run.trajectory_dump", 0);
  run.envelope_scale = doc.number("run.envelope_scale", 1.0);
  run.series = doc.word("run.series", "");
  run.y_inflation = doc.number("run.y_inflation", 0.2);
  if (run.horizon < 0.0)
    doc.issues.push_back({ErrorCode::positivity, "run.T", "must be nonnegative"});
  require_positive(doc, "run.dt", run.dt);
  if (run.monitor_every == 0)
    doc.issues.push_back({ErrorCode::invalid_value, "run.monitor_every", "must be at least 1"});
  if (run.snapshot_every == 0)
    doc.issues.push_back({ErrorCode::invalid_value, "run.snapshot_every", "must be at least 1"});

  // model
  auto& m = cfg.model;
  m.t_e = doc.number("model.t_e", 1.0, true);
  m.t_a = doc.number("model.t_a", 1.0, true);
  require_positive(doc, "model.t_e", m.t_e);
  require_positive(doc, "model.t_a", m.t_a);
  m.velocities.speeds = doc.array("model.velocities.speeds", {-1.0, 1.0});
  m.velocities.weights = doc.array("model.velocities.weights",
                                   std::vector<double>(m.velocities.speeds.size(), 1.0));
  try
  {
    m.velocities.validate();
  }
  catch (ArgumentError const& e)
  {
    doc.issues.push_back({ErrorCode::invalid_value, "model.velocities", e.what()});
  }

  std::string const rate_kind = doc.word("model.rate.kind", "constant");
  auto& r = m.lambda;
  if (rate_kind == "constant")
    r.kind = RateKind::constant;
  else if (rate_kind == "clipped_linear")
    r.kind = RateKind::clipped_linear;
  else if (rate_kind == "saturating")
    r.kind = RateKind::saturating;
  else
    doc.issues.push_back({ErrorCode::invalid_value, "model.rate.kind", "unknown rate kind '" + rate_kind + "'"});
  r.rate = doc.number("model.rate.rate", 1.0);
  r.slope = doc.number("model.rate.slope", 0.0);
  r.rate_min = doc.number("model.rate.rate_min", 0.0);
  r.rate_max = doc.number("model.rate.rate_max", 1.0);
  r.half_response = doc.number("model.rate.half_response", 1.0);
  r.hill = doc.number("model.rate.hill", 2.0);
  r.responsiveness = doc.number("model.rate.responsiveness", 1.0);
  if (r.kind == RateKind::constant && r.rate < 0.0)
    doc.issues.push_back({ErrorCode::positivity, "model.rate.rate", "must be nonnegative"});
  if (r.kind == RateKind::saturating)
  {
    if (r.rate_min < 0.0 || r.rate_max < r.rate_min)
      doc.issues.push_back({ErrorCode::positivity, "model.rate.rate_min", "need 0 <= rate_min <= rate_max"});
    require_positive(doc, "model.rate.half_response", r.half_response);
    require_positive(doc, "model.rate.hill", r.hill);
  }
  if (r.responsiveness < 0.0)
    doc.issues.push_back({ErrorCode::positivity, "model.rate.responsiveness", "must be nonnegative"});

  std::string const kernel_kind = doc.word("model.kernel.kind", "uniform");
  if (kernel_kind == "uniform")
    m.kernel_spec.kind = KernelKind::uniform;
  else if (kernel_kind == "persistence")
    m.kernel_spec.kind = KernelKind::persistence;
  else if (kernel_kind == "tabulated")
    m.kernel_spec.kind = KernelKind::tabulated;
  else
    doc.issues.push_back({ErrorCode::invalid_value, "model.kernel.kind", "unknown kernel '" + kernel_kind + "'"});
  m.kernel_spec.p_same = doc.number("model.kernel.p_same", 0.5);
  m.kernel_spec.matrix = doc.array("model.kernel.matrix", {}, m.kernel_spec.kind == KernelKind::tabulated);

  // signal
  auto const d = doc.array("signal.d", {}, true);
  auto const k = doc.array("signal.k", {}, true);
  auto const k0 = doc.array("signal.k0", {}, true);
  if (d.size() != k.size() || d.size() != k0.size() || d.empty())
  {
    if (doc.has("signal.d") && doc.has("signal.k") && doc.has("signal.k0"))
      doc.issues.push_back({ErrorCode::invalid_value, "signal", "d, k and k0 need equal nonzero lengths"});
  }
  else
  {
    for (std::size_t i = 0; i < d.size(); ++i)
    {
      std::string const idx = "[" + std::to_string(i) + "]";
      require_positive(doc, "signal.d" + idx, d[i]);
      require_positive(doc, "signal.k" + idx, k[i]);
      require_positive(doc, "signal.k0" + idx, k0[i]);
      m.signal.params.push_back({d[i], k[i], k0[i]});
    }
  }
  std::size_t const mc = m.signal.params.size();
  std::string const reaction = doc.word("signal.reaction", "produce_degrade");
  if (reaction == "produce_degrade")
    m.signal.reaction.kind = ReactionKind::produce_degrade;
  else if (reaction == "consume")
    m.signal.reaction.kind = ReactionKind::consume;
  else
    doc.issues.push_back({ErrorCode::invalid_value, "signal.reaction", "unknown reaction '" + reaction + "'"});
  m.signal.reaction.coupling = doc.array("signal.coupling", {});
  if (!m.signal.reaction.coupling.empty() && m.signal.reaction.coupling.size() != mc * mc)
    doc.issues.push_back({ErrorCode::invalid_value, "signal.coupling", "expected an M x M matrix"});

  std::string const gain_kind = doc.word("model.gain.kind", "linear");
  if (gain_kind == "linear")
    m.g.kind = GainKind::linear;
  else if (gain_kind == "saturating")
    m.g.kind = GainKind::saturating;
  else
    doc.issues.push_back({ErrorCode::invalid_value, "model.gain.kind", "unknown gain '" + gain_kind + "'"});
  m.g.gain = doc.array("model.gain.gain", std::vector<double>(mc, 1.0));
  m.g.saturation = doc.array("model.gain.saturation", std::vector<double>(mc, 0.0));
  if (m.g.gain.size() != mc || m.g.saturation.size() != mc)
    doc.issues.push_back({ErrorCode::invalid_value, "model.gain", "gain and saturation need one entry per signal"});
  for (std::size_t i = 0; i < m.g.gain.size(); ++i)
  {
    if (m.g.gain[i] < 0.0)
      doc.issues.push_back({ErrorCode::positivity, "model.gain.gain[" + std::to_string(i) + "]", "must be nonnegative"});
  }
  for (std::size_t i = 0; i < m.g.saturation.size(); ++i)
  {
    if (m.g.saturation[i] < 0.0)
      doc.issues.push_back({ErrorCode::positivity, "model.gain.saturation[" + std::to_string(i) + "]", "must be nonnegative"});
  }

  // grid
  m.length = doc.number("grid.length", 1.0, true);
  require_positive(doc, "grid.length", m.length);
  m.nx = doc.count("grid.nx", 64, true);
  m.ny1 = doc.count("grid.ny1", 32);
  m.ny2 = doc.count("grid.ny2", 32);
  if (m.nx < 4 || m.ny1 < 4 || m.ny2 < 4)
    doc.issues.push_back({ErrorCode::invalid_value, "grid", "every grid needs at least 4 cells"});

  // growth
  auto& gs = cfg.growth;
  gs.phi = growth_function(doc, "growth.phi", gs.phi);
  gs.psi = growth_function(doc, "growth.psi", gs.psi);
  gs.lambda_fn = growth_function(doc, "growth.lambda_fn", gs.lambda_fn);
  gs.pi = growth_function(doc, "growth.pi", gs.pi);
  gs.omega = doc.number("growth.omega", gs.omega);
  gs.sigma = doc.number("growth.sigma", gs.sigma);
  gs.gamma = doc.number("growth.gamma", gs.gamma);
  gs.c_lambda = doc.number("growth.c_lambda", gs.c_lambda);
  gs.c_y1 = doc.number("growth.c_y1", gs.c_y1);
  gs.c_rate = doc.number("growth.c_rate", gs.c_rate);
  gs.c_div = doc.number("growth.c_div", gs.c_div);
  gs.c_div_one = doc.number("growth.c_div_one", gs.c_div_one);
  gs.c_bounded = doc.number("growth.c_bounded", gs.c_bounded);
  for (auto const* key : {"growth.c_lambda", "growth.c_y1", "growth.c_rate", "growth.c_div", "growth.c_div_one"})
  {
    double v = 0.0;
    if (doc.entries.count(key) && Document::to_double(doc.entries[key].raw, v) && !(v > 0.0))
      doc.issues.push_back({ErrorCode::positivity, key, "must be positive"});
  }

  // initial data
  auto& in = cfg.initial;
  in.mass = doc.number("initial.mass", 1.0);
  if (in.mass < 0.0)
    doc.issues.push_back({ErrorCode::positivity, "initial.mass", "must be nonnegative"});
  in.x_shape = shape(doc, "initial.x_shape", Shape::gaussian, true);
  in.x_center = doc.number("initial.x_center", 0.5 * m.length);
  in.x_width = doc.number("initial.x_width", 1.0);
  if (in.x_shape != Shape::uniform)
    require_positive(doc, "initial.x_width", in.x_width);
  in.v_weights = doc.array("initial.v_weights", {});
  if (!in.v_weights.empty())
  {
    if (in.v_weights.size() != m.velocities.size())
      doc.issues.push_back({ErrorCode::invalid_value, "initial.v_weights", "need one weight per velocity"});
    double s = 0.0;
    for (double w : in.v_weights)
    {
      if (w < 0.0)
        doc.issues.push_back({ErrorCode::positivity, "initial.v_weights", "must be nonnegative"});
      s += w;
    }
    if (!(s > 0.0))
      doc.issues.push_back({ErrorCode::positivity, "initial.v_weights", "need a positive weight"});
  }
  in.y_shape = shape(doc, "initial.y_shape", Shape::gaussian, false);
  auto const yc = doc.array("initial.y_center", {0.0, 0.0});
  auto const yw = doc.array("initial.y_width", {0.1, 0.1});
  if (yc.size() != 2 || yw.size() != 2)
  {
    doc.issues.push_back({ErrorCode::invalid_value, "initial.y_center", "y center and width need two entries"});
  }
  else
  {
    in.y_center = {yc[0], yc[1]};
    in.y_width = {yw[0], yw[1]};
    require_positive(doc, "initial.y_width[0]", yw[0]);
    require_positive(doc, "initial.y_width[1]", yw[1]);
  }
  if (doc.has("initial.s0"))
  {
    Entry const& e = doc.entries["initial.s0"];
    if (!e.is_array && e.raw == "elliptic")
    {
      doc.find("initial.s0");
      in.s0_elliptic = true;
    }
    else
    {
      in.s0_elliptic = false;
      in.s0_value = doc.array("initial.s0", {});
      if (in.s0_value.size() != mc)
        doc.issues.push_back({ErrorCode::invalid_value, "initial.s0", "need 'elliptic' or one value per signal"});
      for (double v : in.s0_value)
      {
        if (v < 0.0)
          doc.issues.push_back({ErrorCode::positivity, "initial.s0", "must be nonnegative"});
      }
    }
  }
  if (cfg.signal_mode == SignalMode::elliptic && !in.s0_elliptic)
    doc.issues.push_back({ErrorCode::invalid_value, "initial.s0", "elliptic mode recomputes S0 from n0"});
  if (cfg.signal_mode == SignalMode::elliptic && m.signal.reaction.kind == ReactionKind::consume)
    doc.issues.push_back({ErrorCode::invalid_value, "signal.reaction", "elliptic mode needs produce_degrade"});

  doc.report_unused();

  // Kernel after the velocities are known.
  if (doc.issues.empty())
  {
    try
    {
      m.kernel = TurningKernel::build(m.kernel_spec, m.velocities);
    }
    catch (ConfigError const& e)
    {
      for (auto const& i : e.issues())
        doc.issues.push_back(i);
    }
  }

  // Support and step constraints.
  if (doc.issues.empty())
  {
    if (in.x_shape != Shape::uniform && 2.0 * in.x_half_support() >= 0.5 * m.length)
    {
      doc.issues.push_back({ErrorCode::support_too_wide, "initial.x_width",
                            "x support " + std::to_string(2.0 * in.x_half_support())
                                + " is not below L/2 = " + std::to_string(0.5 * m.length)});
    }
    if (run.dt > 0.25 * std::min(m.t_e, m.t_a) * (1.0 + 1e-12))
      doc.issues.push_back({ErrorCode::invalid_value, "run.dt", "must not exceed min(t_e, t_a)/4"});
  }
  if (!doc.issues.empty())
    throw ConfigError(doc.issues);

  if (in.x_shape == Shape::uniform)
    cfg.notes.emplace_back("x-homogeneous initial data: the support rule is waived and the data wraps the periodic domain");

  // Derived bounds: sup |S| over the run, the internal state box and the grid.
  PeriodicGrid const xg{m.nx, m.length};
  double const n1 = in.mass;
  auto const elliptic = signal_bound_report(n1, 0.0, m.signal, xg, m.velocities.max_speed());
  double s_sq = 0.0;
  for (std::size_t c = 0; c < mc; ++c)
  {
    double v = 0.0;
    if (cfg.signal_mode == SignalMode::elliptic)
    {
      v = elliptic.components[c].value;
    }
    else
    {
      // Initial Wiener norm plus the accumulated source.
      double const w0 = in.s0_elliptic ? elliptic.components[c].value : in.s0_value[c];
      v = w0 + (m.signal.reaction.kind == ReactionKind::produce_degrade ? elliptic.components[c].value : 0.0);
    }
    s_sq += v * v;
  }
  cfg.signal_bound = std::sqrt(s_sq);
  cfg.state_box = internal_state_box(cfg.signal_bound, m, cfg.growth, in.y_support());
  cfg.grid_box = grid_box(cfg.state_box.tight, run.y_inflation, m.ny1);

  auto& sb = cfg.sample_box;
  sb.s_max = cfg.signal_bound;
  double dc = 0.0;
  for (auto const& c : elliptic.components)
    dc += m.velocities.max_speed() * c.gradient + c.time_derivative;
  sb.dcdt_max = dc;
  sb.y_lo = cfg.grid_box.lo;
  sb.y_hi = cfg.grid_box.hi;
  cfg.validation = validate_growth_conditions(m, cfg.growth, sb);
  return cfg;
}

ScenarioConfig load_config(std::string const& path, std::vector<std::string> const& overrides)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigError(ErrorCode::missing_field, path, "cannot open configuration file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides, path);
}

}  // namespace kchem
