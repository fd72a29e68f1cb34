#include "fedscore/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

#include "fedscore/io.hpp"
#include "fedscore/random.hpp"

namespace fedscore {

namespace {

std::string trim(std::string_view s) {
  auto b = s.begin();
  auto e = s.end();
  while (b != e && std::isspace(static_cast<unsigned char>(*b))) ++b;
  while (e != b && std::isspace(static_cast<unsigned char>(*(e - 1)))) --e;
  return std::string(b, e);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

// INI-style document: [section] headers, key = value lines, '#' comments.
class Document {
 public:
  Document(std::string_view text, std::string origin) : origin_(std::move(origin)) {
    std::istringstream in{std::string(text)};
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      const auto hash = raw.find('#');
      const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') fail("", line_no, "unterminated section header");
        section = trim(std::string_view(line).substr(1, line.size() - 2));
        if (kSections.count(section) == 0) fail(section, line_no, "unknown section");
        if (sections_.count(section)) fail(section, line_no, "duplicate section");
        sections_[section] = line_no;
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) fail("", line_no, "expected 'key = value'");
      if (section.empty()) fail("", line_no, "key outside of any section");
      const std::string key = section + "." + trim(std::string_view(line).substr(0, eq));
      if (entries_.count(key)) fail(key, line_no, "duplicate key");
      entries_[key] = {trim(std::string_view(line).substr(eq + 1)), line_no, false};
    }
  }

  bool has_section(const std::string& s) const { return sections_.count(s) > 0; }

  const Entry* find(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  const Entry& require(const std::string& key) {
    const Entry* e = find(key);
    if (!e) {
      const auto dot = key.find('.');
      const auto sec = key.substr(0, dot);
      const int line = sections_.count(sec) ? sections_.at(sec) : 0;
      fail(key, line, "missing required field '" + key.substr(dot + 1) + "'");
    }
    return *e;
  }

  void check_unused() const {
    for (const auto& [key, e] : entries_)
      if (!e.used) fail(key, e.line, "unknown field");
  }

  [[noreturn]] void fail(const std::string& field, int line, const std::string& why) const {
    std::ostringstream os;
    os << origin_ << ':' << line << ": ";
    if (!field.empty()) os << "field '" << field << "': ";
    os << why;
    throw ScenarioError(os.str(), field, line);
  }

  template <typename T>
  T number(const std::string& key, const Entry& e) const {
    T v{};
    const auto& s = e.value;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) fail(key, e.line, "not a valid number: '" + s + "'");
    return v;
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (const Entry* e = find(key)) out = number<T>(key, *e);
  }

  template <typename T>
  std::vector<T> list(const std::string& key, const Entry& e) const {
    std::vector<T> out;
    for (const auto& item : split(e.value, ',')) {
      if (item.empty()) fail(key, e.line, "empty list element");
      out.push_back(number<T>(key, Entry{item, e.line, true}));
    }
    return out;
  }

 private:
  static inline const std::set<std::string> kSections = {"scenario",  "federation",   "dataset",
                                                         "ablation",  "influence",    "manipulation",
                                                         "weighted_aggregation",      "misbehavior"};
  std::string origin_;
  std::map<std::string, int> sections_;
  std::map<std::string, Entry> entries_;
};

std::vector<Method> method_list(Document& doc, const std::string& key, const Entry& e) {
  std::vector<Method> out;
  for (const auto& item : split(e.value, ',')) {
    try {
      out.push_back(parse_method(item));
    } catch (const std::invalid_argument& ex) {
      doc.fail(key, e.line, ex.what());
    }
  }
  return out;
}

ScorerKind parse_scorer(std::string_view s) {
  switch (parse_method(s)) {
    case Method::kLOO:
      return ScorerKind::kLOO;
    case Method::kFP:
      return ScorerKind::kFP;
    case Method::kEE:
      return ScorerKind::kEE;
    default:
      throw std::invalid_argument("manipulation scorers are LOO, FP or EE, got '" + std::string(s) + "'");
  }
}

bool parse_bool(Document& doc, const std::string& key, const Entry& e) {
  if (e.value == "true" || e.value == "yes" || e.value == "1") return true;
  if (e.value == "false" || e.value == "no" || e.value == "0") return false;
  doc.fail(key, e.line, "expected true or false");
}

}  // namespace

std::vector<double> linear_noise_rates(int n_clients) {
  std::vector<double> r(static_cast<std::size_t>(n_clients), 0.0);
  if (n_clients < 2) return r;
  for (int i = 0; i < n_clients; ++i) r[static_cast<std::size_t>(i)] = static_cast<double>(i) / (n_clients - 1);
  return r;
}

MisreportStrategy StrategySpec::resolve(const RoundUtilities& u) const {
  double p = param;
  if (symbol == "v_empty") p = u.v_empty;
  else if (symbol == "v_grand") p = u.v_grand;
  return {kind, target, p, field};
}

StrategySpec parse_strategy(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.size() < 2 || parts.size() > 4)
    throw std::invalid_argument("strategy '" + std::string(text) + "' must be kind:target[:param][:field]");
  StrategySpec s;
  const auto& kind = parts[0];
  if (kind == "honest") s.kind = MisreportKind::kHonest;
  else if (kind == "additive_bias") s.kind = MisreportKind::kAdditiveBias;
  else if (kind == "scale") s.kind = MisreportKind::kScale;
  else if (kind == "deflate_to") s.kind = MisreportKind::kDeflateTo;
  else throw std::invalid_argument("unknown misreport kind '" + kind + "'");
  auto r = std::from_chars(parts[1].data(), parts[1].data() + parts[1].size(), s.target);
  if (r.ec != std::errc() || s.target < 0) throw std::invalid_argument("bad strategy target '" + parts[1] + "'");
  if (s.kind != MisreportKind::kHonest) {
    if (parts.size() < 3) throw std::invalid_argument("strategy '" + kind + "' needs a parameter");
    const auto& p = parts[2];
    if (p == "v_empty" || p == "v_grand") {
      s.symbol = p;
    } else {
      auto pr = std::from_chars(p.data(), p.data() + p.size(), s.param);
      if (pr.ec != std::errc() || pr.ptr != p.data() + p.size())
        throw std::invalid_argument("bad strategy parameter '" + p + "'");
    }
  }
  if (parts.size() == 4) {
    if (parts[3] == "both") s.field = ReportField::kBoth;
    else if (parts[3] == "with") s.field = ReportField::kWithSelf;
    else if (parts[3] == "without") s.field = ReportField::kWithoutSelf;
    else throw std::invalid_argument("strategy field must be both, with or without");
  }
  return s;
}

std::uint64_t Scenario::repeat_seed(int repeat) const {
  return derive_seed(federation.seed, {stream::kRepeat, static_cast<std::uint64_t>(repeat)});
}

Scenario parse_scenario(std::string_view text, const std::string& origin) {
  Document doc(text, origin);
  Scenario sc;
  sc.source_text = std::string(text);

  if (const Entry* e = doc.find("scenario.name")) sc.name = e->value;
  doc.read("scenario.eval_round", sc.eval_round);
  doc.read("scenario.repeats", sc.repeats);
  if (const Entry* e = doc.find("scenario.methods")) sc.methods = method_list(doc, "scenario.methods", *e);
  if (const Entry* e = doc.find("scenario.reference")) {
    const auto ref = method_list(doc, "scenario.reference", *e);
    if (ref.size() != 1 || (ref[0] != Method::kMRSV && ref[0] != Method::kSV))
      doc.fail("scenario.reference", e->line, "reference must be MR-SV or true-SV");
    sc.reference = ref[0];
  }
  if (const Entry* e = doc.find("scenario.mr_combine")) {
    if (e->value == "mean") sc.mr_combine = RoundCombine::kMean;
    else if (e->value == "sum") sc.mr_combine = RoundCombine::kSum;
    else doc.fail("scenario.mr_combine", e->line, "expected mean or sum");
  }

  if (const Entry* e = doc.find("scenario.efficiency")) {
    try {
      sc.efficiency = parse_efficiency(e->value);
    } catch (const std::invalid_argument&) {
      doc.fail("scenario.efficiency", e->line, "expected total or round_gain");
    }
  }

  if (const Entry* e = doc.find("scenario.fidelity")) sc.fidelity = parse_bool(doc, "scenario.fidelity", *e);

  auto& f = sc.federation;
  {
    const Entry& e = doc.require("federation.n_clients");
    f.n_clients = doc.number<int>("federation.n_clients", e);
  }
  if (const Entry* e = doc.find("federation.partition")) {
    if (e->value == "dirichlet") f.partition = PartitionKind::kDirichlet;
    else if (e->value == "iid") f.partition = PartitionKind::kIid;
    else doc.fail("federation.partition", e->line, "expected dirichlet or iid");
  }
  doc.read("federation.dirichlet_mu", f.dirichlet_mu);
  doc.read("federation.rounds", f.rounds);
  doc.read("federation.local_epochs", f.local_epochs);
  doc.read("federation.lr", f.lr);
  doc.read("federation.batch_size", f.batch_size);
  doc.read("federation.hidden", f.hidden);
  doc.read("federation.seed", f.seed);
  if (const Entry* e = doc.find("federation.utility")) {
    try {
      f.utility = parse_utility(e->value);
    } catch (const std::invalid_argument& ex) {
      doc.fail("federation.utility", e->line, ex.what());
    }
  }
  if (const Entry* e = doc.find("federation.noise_rates"))
    f.noise_rates = e->value == "linear" ? linear_noise_rates(f.n_clients)
                                         : doc.list<double>("federation.noise_rates", *e);
  if (const Entry* e = doc.find("federation.flip_mode")) {
    if (e->value == "uniform_other") f.flip_mode = FlipMode::kUniformOther;
    else if (e->value == "targeted") f.flip_mode = FlipMode::kTargeted;
    else doc.fail("federation.flip_mode", e->line, "expected uniform_other or targeted");
  }

  auto& d = f.dataset;
  doc.read("dataset.n_classes", d.n_classes);
  doc.read("dataset.dim", d.dim);
  doc.read("dataset.samples_per_client", d.samples_per_client);
  doc.read("dataset.test_samples_per_class", d.test_samples_per_class);
  doc.read("dataset.separation", d.separation);
  doc.read("dataset.means_seed", d.means_seed);

  if (doc.has_section("ablation")) {
    AblationBlock a;
    const Entry& axis = doc.require("ablation.axis");
    if (axis.value == "round") a.axis = AblationAxis::kRound;
    else if (axis.value == "n_clients") a.axis = AblationAxis::kClients;
    else if (axis.value == "mu") a.axis = AblationAxis::kMu;
    else doc.fail("ablation.axis", axis.line, "expected round, n_clients or mu");
    const Entry& values = doc.require("ablation.values");
    a.values = doc.list<double>("ablation.values", values);
    for (double v : a.values) {
      const bool integral = a.axis != AblationAxis::kMu;
      if (!(v > 0.0) || (integral && v != static_cast<double>(static_cast<long long>(v))))
        doc.fail("ablation.values", values.line, "values must be positive" + std::string(integral ? " integers" : ""));
      if (a.axis == AblationAxis::kRound && v > f.rounds)
        doc.fail("ablation.values", values.line, "round exceeds federation.rounds");
    }
    sc.ablation = std::move(a);
  }

  if (doc.has_section("influence")) {
    InfluenceBlock b;
    if (const Entry* e = doc.find("influence.normalize")) b.normalize = parse_bool(doc, "influence.normalize", *e);
    sc.influence = b;
  }

  if (doc.has_section("manipulation")) {
    ManipulationBlock b;
    if (const Entry* e = doc.find("manipulation.scorers")) {
      b.scorers.clear();
      for (const auto& item : split(e->value, ',')) {
        try {
          b.scorers.push_back(parse_scorer(item));
        } catch (const std::invalid_argument& ex) {
          doc.fail("manipulation.scorers", e->line, ex.what());
        }
      }
    }
    const Entry& e = doc.require("manipulation.strategies");
    for (const auto& item : split(e.value, ',')) {
      try {
        b.strategies.push_back(parse_strategy(item));
      } catch (const std::invalid_argument& ex) {
        doc.fail("manipulation.strategies", e.line, ex.what());
      }
      if (b.strategies.back().target >= f.n_clients)
        doc.fail("manipulation.strategies", e.line, "strategy target out of range");
    }
    sc.manipulation = std::move(b);
  }

  if (doc.has_section("weighted_aggregation")) {
    WeightedAggregationBlock b;
    if (const Entry* e = doc.find("weighted_aggregation.methods"))
      b.methods = method_list(doc, "weighted_aggregation.methods", *e);
    if (const Entry* e = doc.find("weighted_aggregation.noise_rates")) {
      b.noise_rates = e->value == "linear" ? linear_noise_rates(f.n_clients)
                                           : doc.list<double>("weighted_aggregation.noise_rates", *e);
      if (b.noise_rates->size() != static_cast<std::size_t>(f.n_clients))
        doc.fail("weighted_aggregation.noise_rates", e->line, "needs one rate per client");
    }
    sc.weighted_aggregation = std::move(b);
  }

  if (doc.has_section("misbehavior")) {
    MisbehaviorBlock b;
    if (const Entry* e = doc.find("misbehavior.attacker")) {
      b.attacker = doc.number<int>("misbehavior.attacker", *e);
      if (b.attacker < 0 || b.attacker >= f.n_clients)
        doc.fail("misbehavior.attacker", e->line, "attacker index out of range");
    }
    if (const Entry* e = doc.find("misbehavior.attacker_rate")) {
      b.attacker_rate = doc.number<double>("misbehavior.attacker_rate", *e);
      if (!(b.attacker_rate >= 0.0 && b.attacker_rate <= 1.0))
        doc.fail("misbehavior.attacker_rate", e->line, "must lie in [0, 1]");
    }
    if (const Entry* e = doc.find("misbehavior.methods")) b.methods = method_list(doc, "misbehavior.methods", *e);
    sc.misbehavior = std::move(b);
  }

  doc.check_unused();

  try {
    f.validate();
  } catch (const std::invalid_argument& ex) {
    throw ScenarioError(origin + ": " + ex.what(), "federation", 0);
  }
  if (sc.repeats < 1) throw ScenarioError(origin + ": field 'scenario.repeats': must be >= 1", "scenario.repeats", 0);
  if (sc.eval_round < 1 || sc.eval_round > f.rounds)
    throw ScenarioError(origin + ": field 'scenario.eval_round': must lie in [1, federation.rounds]",
                        "scenario.eval_round", 0);
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) { return parse_scenario(read_file(path), path.string()); }

}  // namespace fedscore
