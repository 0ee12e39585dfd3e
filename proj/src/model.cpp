#include "tfvb/model.hpp"

#include "tfvb/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

namespace tfvb {

void PriorSpec::validate(Index cells, std::string_view owner) const {
  for (const Eigen::ArrayXd* a : {&shape, &mean}) {
    if (a->size() != 1 && a->size() != cells)
      throw Error(Errc::InvalidPrior,
                  "prior array for '" + std::string(owner) + "' has wrong size");
    if (a->size() == 0 || !a->allFinite() || !(*a > 0.0).all())
      throw Error(Errc::InvalidPrior,
                  "prior for '" + std::string(owner) + "' must be finite and positive");
  }
}

bool operator==(const PriorSpec& a, const PriorSpec& b) {
  return a.shape.size() == b.shape.size() && a.mean.size() == b.mean.size() &&
         (a.shape == b.shape).all() && (a.mean == b.mean).all();
}

bool operator==(const FactorSpec& a, const FactorSpec& b) {
  return a.name == b.name && a.indices == b.indices && a.prior == b.prior;
}

bool operator==(const ObservationSpec& a, const ObservationSpec& b) {
  return a.name == b.name && a.indices == b.indices && a.factors == b.factors;
}

bool operator==(const ModelSpec& a, const ModelSpec& b) {
  return a.space() == b.space() && a.factors() == b.factors() &&
         a.observations() == b.observations();
}

ModelSpec::ModelSpec(IndexSpace space, std::vector<FactorSpec> factors,
                     std::vector<ObservationSpec> observations)
    : space_(std::move(space)),
      factors_(std::move(factors)),
      observations_(std::move(observations)) {
  const Index n_idx = space_.size();
  auto check_indices = [&](const std::vector<Index>& idx, const std::string& owner) {
    std::set<Index> seen;
    for (Index p : idx) {
      if (p < 0 || p >= n_idx)
        throw Error(Errc::UnknownIndex, "'" + owner + "' refers to an unknown index");
      if (!seen.insert(p).second)
        throw Error(Errc::InvalidSpec, "'" + owner + "' repeats index '" +
                                           space_.name(p) + "'");
    }
  };

  for (std::size_t a = 0; a < factors_.size(); ++a) {
    const auto& f = factors_[a];
    for (std::size_t b = 0; b < a; ++b)
      if (factors_[b].name == f.name)
        throw Error(Errc::InvalidSpec, "duplicate factor '" + f.name + "'");
    check_indices(f.indices, f.name);
    if (f.prior) f.prior->validate(factor_size(static_cast<Index>(a)), f.name);
  }

  coupling_ = Eigen::MatrixXi::Zero(num_observations(), num_factors());
  for (std::size_t n = 0; n < observations_.size(); ++n) {
    const auto& o = observations_[n];
    for (std::size_t m = 0; m < n; ++m)
      if (observations_[m].name == o.name)
        throw Error(Errc::InvalidSpec, "duplicate observation '" + o.name + "'");
    check_indices(o.indices, o.name);
    if (o.factors.empty())
      throw Error(Errc::InvalidSpec, "observation '" + o.name + "' has no factors");
    std::set<Index> produced;
    for (Index a : o.factors) {
      if (a < 0 || a >= num_factors())
        throw Error(Errc::InvalidSpec, "observation '" + o.name + "' lists an unknown factor");
      if (coupling_(static_cast<Index>(n), a) != 0)
        throw Error(Errc::InvalidSpec, "observation '" + o.name + "' lists factor '" +
                                           factors_[a].name + "' twice");
      coupling_(static_cast<Index>(n), a) = 1;
      produced.insert(factors_[a].indices.begin(), factors_[a].indices.end());
    }
    for (Index p : o.indices)
      if (!produced.count(p))
        throw Error(Errc::UncoveredVisibleIndex, "index '" + space_.name(p) +
                                                     "' of observation '" + o.name +
                                                     "' is carried by none of its factors");
  }

  for (Index a = 0; a < num_factors(); ++a)
    if (coupling_.col(a).sum() == 0)
      throw Error(Errc::OrphanFactor,
                  "factor '" + factors_[a].name + "' appears in no observation");
}

std::optional<Index> ModelSpec::find_factor(std::string_view name) const {
  for (Index a = 0; a < num_factors(); ++a)
    if (factors_[a].name == name) return a;
  return std::nullopt;
}

std::optional<Index> ModelSpec::find_observation(std::string_view name) const {
  for (Index n = 0; n < num_observations(); ++n)
    if (observations_[n].name == name) return n;
  return std::nullopt;
}

std::vector<std::string> ModelSpec::factor_index_names(Index alpha) const {
  std::vector<std::string> out;
  for (Index p : factors_[alpha].indices) out.push_back(space_.name(p));
  return out;
}

std::vector<Index> ModelSpec::factor_shape(Index alpha) const {
  std::vector<Index> out;
  for (Index p : factors_[alpha].indices) out.push_back(space_.dim(p));
  return out;
}

Index ModelSpec::factor_size(Index alpha) const {
  Index n = 1;
  for (Index p : factors_[alpha].indices) n *= space_.dim(p);
  return n;
}

std::vector<std::string> ModelSpec::observation_index_names(Index nu) const {
  std::vector<std::string> out;
  for (Index p : observations_[nu].indices) out.push_back(space_.name(p));
  return out;
}

std::vector<Index> ModelSpec::observation_shape(Index nu) const {
  std::vector<Index> out;
  for (Index p : observations_[nu].indices) out.push_back(space_.dim(p));
  return out;
}

std::vector<Index> latent_indices(const ModelSpec& spec, Index nu) {
  const auto& obs = spec.observation(nu);
  std::vector<bool> used(static_cast<std::size_t>(spec.space().size()), false);
  for (Index a : obs.factors)
    for (Index p : spec.factor(a).indices) used[p] = true;
  for (Index p : obs.indices) used[p] = false;
  std::vector<Index> out;
  for (Index p = 0; p < spec.space().size(); ++p)
    if (used[p]) out.push_back(p);
  return out;
}

std::vector<PriorSpec> resolve_priors(const ModelSpec& spec, const PriorSpec& fallback) {
  std::vector<PriorSpec> out;
  for (Index a = 0; a < spec.num_factors(); ++a) {
    PriorSpec p = spec.factor(a).prior.value_or(fallback);
    p.validate(spec.factor_size(a), spec.factor(a).name);
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

struct Token {
  enum Kind { Word, Comma, Equals } kind;
  std::string text;
};

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
         c == '-' || c == '+';
}

std::vector<Token> tokenize(std::string_view line, int line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == ',') {
      out.push_back({Token::Comma, ","});
      ++i;
    } else if (c == '=') {
      out.push_back({Token::Equals, "="});
      ++i;
    } else if (is_word_char(c)) {
      std::size_t j = i;
      while (j < line.size() && is_word_char(line[j])) ++j;
      out.push_back({Token::Word, std::string(line.substr(i, j - i))});
      i = j;
    } else {
      throw Error(Errc::SyntaxError,
                  "line " + std::to_string(line_no) + ": unexpected character '" +
                      std::string(1, c) + "'",
                  line_no);
    }
  }
  return out;
}

bool is_identifier(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_'))
    return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

class LineParser {
 public:
  LineParser(std::vector<Token> tokens, int line) : toks_(std::move(tokens)), line_(line) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(Errc::SyntaxError, "line " + std::to_string(line_) + ": " + msg, line_);
  }

  bool done() const { return pos_ >= toks_.size(); }
  bool peek(Token::Kind k, std::size_t ahead = 0) const {
    return pos_ + ahead < toks_.size() && toks_[pos_ + ahead].kind == k;
  }

  std::string identifier(const char* what) {
    if (!peek(Token::Word) || !is_identifier(toks_[pos_].text))
      fail(std::string("expected ") + what);
    return toks_[pos_++].text;
  }

  void expect(Token::Kind k, const char* what) {
    if (!peek(k)) fail(std::string("expected '") + what + "'");
    ++pos_;
  }

  double number(const char* what) {
    if (!peek(Token::Word)) fail(std::string("expected ") + what);
    const std::string& s = toks_[pos_].text;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      fail(std::string("malformed ") + what + " '" + s + "'");
    ++pos_;
    return v;
  }

  Index integer(const char* what) {
    if (!peek(Token::Word)) fail(std::string("expected ") + what);
    const std::string& s = toks_[pos_].text;
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      fail(std::string("malformed ") + what + " '" + s + "'");
    ++pos_;
    return static_cast<Index>(v);
  }

  std::vector<std::string> name_list(const char* what) {
    std::vector<std::string> out{identifier(what)};
    while (peek(Token::Comma)) {
      ++pos_;
      out.push_back(identifier(what));
    }
    return out;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int line_;
};

}  // namespace

ModelSpec parse_model_spec(std::string_view text) {
  struct RawFactor {
    std::string name;
    std::vector<std::string> indices;
    std::optional<double> a, b;
    int line;
  };
  struct RawObservation {
    std::string name;
    std::vector<std::string> indices;
    std::vector<std::string> factors;
    int line;
  };
  std::vector<std::string> index_names;
  std::vector<Index> index_dims;
  std::vector<RawFactor> raw_factors;
  std::vector<RawObservation> raw_obs;

  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    auto tokens = tokenize(line, line_no);
    if (tokens.empty()) continue;
    LineParser p(std::move(tokens), line_no);
    const std::string keyword = p.identifier("keyword");
    if (keyword == "index") {
      std::string name = p.identifier("index name");
      Index dim = p.integer("cardinality");
      if (dim < 1) p.fail("cardinality must be at least 1");
      if (std::find(index_names.begin(), index_names.end(), name) != index_names.end())
        p.fail("index '" + name + "' declared twice");
      index_names.push_back(name);
      index_dims.push_back(dim);
    } else if (keyword == "factor") {
      RawFactor f{p.identifier("factor name"), {}, {}, {}, line_no};
      f.indices = p.name_list("index name");
      while (!p.done()) {
        std::string key = p.identifier("prior key");
        p.expect(Token::Equals, "=");
        double v = p.number("prior value");
        if (key == "A") {
          f.a = v;
        } else if (key == "B") {
          f.b = v;
        } else {
          p.fail("unknown factor attribute '" + key + "'");
        }
      }
      if (f.a.has_value() != f.b.has_value()) {
        // A lone A or B completes from the default prior.
        PriorSpec d;
        if (!f.a) f.a = d.shape[0];
        if (!f.b) f.b = d.mean[0];
      }
      raw_factors.push_back(std::move(f));
    } else if (keyword == "observe") {
      RawObservation o{p.identifier("observation name"), {}, {}, line_no};
      o.indices = p.name_list("index name");
      p.expect(Token::Equals, "=");
      o.factors = p.name_list("factor name");
      if (!p.done()) p.fail("trailing tokens after factor list");
      raw_obs.push_back(std::move(o));
    } else {
      p.fail("unknown declaration '" + keyword + "'");
    }
  }

  IndexSpace space(index_names, index_dims);
  auto resolve = [&](const std::string& name, int ln) {
    auto pos = space.find(name);
    if (!pos)
      throw Error(Errc::UnknownIndex,
                  "line " + std::to_string(ln) + ": unknown index '" + name + "'", ln);
    return *pos;
  };

  std::vector<FactorSpec> factors;
  for (const auto& rf : raw_factors) {
    FactorSpec f{rf.name, {}, std::nullopt};
    for (const auto& n : rf.indices) f.indices.push_back(resolve(n, rf.line));
    if (rf.a) {
      if (!(*rf.a > 0.0) || !(*rf.b > 0.0) || !std::isfinite(*rf.a) || !std::isfinite(*rf.b))
        throw Error(Errc::InvalidPrior,
                    "line " + std::to_string(rf.line) + ": prior of '" + rf.name +
                        "' must be positive",
                    rf.line);
      f.prior = PriorSpec::scalar(*rf.a, *rf.b);
    }
    factors.push_back(std::move(f));
  }

  std::vector<ObservationSpec> observations;
  for (const auto& ro : raw_obs) {
    ObservationSpec o{ro.name, {}, {}};
    for (const auto& n : ro.indices) o.indices.push_back(resolve(n, ro.line));
    for (const auto& fname : ro.factors) {
      auto it = std::find_if(factors.begin(), factors.end(),
                             [&](const FactorSpec& f) { return f.name == fname; });
      if (it == factors.end())
        throw Error(Errc::SyntaxError,
                    "line " + std::to_string(ro.line) + ": unknown factor '" + fname + "'",
                    ro.line);
      o.factors.push_back(static_cast<Index>(it - factors.begin()));
    }
    observations.push_back(std::move(o));
  }

  return ModelSpec(std::move(space), std::move(factors), std::move(observations));
}

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

std::string serialize(const ModelSpec& spec) {
  std::ostringstream out;
  const auto& space = spec.space();
  for (Index p = 0; p < space.size(); ++p)
    out << "index " << space.name(p) << ' ' << space.dim(p) << '\n';
  for (const auto& f : spec.factors()) {
    out << "factor " << f.name << ' ';
    for (std::size_t i = 0; i < f.indices.size(); ++i)
      out << (i ? "," : "") << space.name(f.indices[i]);
    if (f.prior) {
      if (!f.prior->is_scalar())
        throw Error(Errc::InvalidSpec,
                    "factor '" + f.name + "' has an array prior; the text format is scalar-only");
      out << " A=" << format_double(f.prior->shape[0])
          << " B=" << format_double(f.prior->mean[0]);
    }
    out << '\n';
  }
  for (const auto& o : spec.observations()) {
    out << "observe " << o.name << ' ';
    for (std::size_t i = 0; i < o.indices.size(); ++i)
      out << (i ? "," : "") << space.name(o.indices[i]);
    out << " = ";
    for (std::size_t i = 0; i < o.factors.size(); ++i)
      out << (i ? "," : "") << spec.factor(o.factors[i]).name;
    out << '\n';
  }
  return out.str();
}

}  // namespace tfvb
