#include "rlab/index_algebra.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "rlab/errors.hpp"

namespace rlab {

namespace {

std::string fmt_num(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void normalize(std::vector<IndexEntry>& e) {
  std::sort(e.begin(), e.end());
  e.erase(std::unique(e.begin(), e.end()), e.end());
}

class Cursor {
 public:
  explicit Cursor(const std::string& s) : s_(s) {}
  void skip_ws() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool eat(char c) {
    skip_ws();
    if (i_ < s_.size() && s_[i_] == c) {
      ++i_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }
  bool eat_word(const std::string& w) {
    skip_ws();
    if (s_.compare(i_, w.size(), w) == 0) {
      i_ += w.size();
      return true;
    }
    return false;
  }
  double number() {
    skip_ws();
    if (eat_word("inf")) return INFINITY;
    if (eat_word("-inf")) return -INFINITY;
    double v = 0;
    auto res = std::from_chars(s_.data() + i_, s_.data() + s_.size(), v);
    if (res.ec != std::errc()) fail("expected a number");
    i_ = res.ptr - s_.data();
    return v;
  }
  bool done() {
    skip_ws();
    return i_ == s_.size();
  }
  [[noreturn]] void fail(const std::string& why) const {
    std::ostringstream os;
    os << "index set literal: " << why << " at offset " << i_ << " in \"" << s_ << "\"";
    throw ParseError(os.str(), 0);
  }

 private:
  const std::string& s_;
  size_t i_ = 0;
};

}  // namespace

IndexSet::IndexSet(std::vector<IndexEntry> entries, double truncation)
    : entries_(std::move(entries)), truncation_(truncation) {
  normalize(entries_);
}

bool IndexSet::log_bearing() const {
  return std::any_of(entries_.begin(), entries_.end(), [](const IndexEntry& e) { return e.logpower > 0; });
}

bool IndexSet::admits(double order, int logpower, double tol) const {
  if (logpower < 0) return false;
  if (order > truncation_ + tol) return true;
  for (const auto& e : entries_)
    if (std::abs(e.order - order) <= tol && logpower <= e.logpower) return true;
  return false;
}

std::string IndexSet::to_string() const {
  std::string out = "{";
  for (size_t i = 0; i < entries_.size(); ++i) {
    if (i) out += ",";
    out += "(" + fmt_num(entries_[i].order) + "," + std::to_string(entries_[i].logpower) + ")";
  }
  out += "}";
  if (!std::isinf(truncation_)) out += "+trunc(" + fmt_num(truncation_) + ")";
  return out;
}

IndexSet IndexSet::parse(const std::string& text) {
  Cursor c(text);
  c.expect('{');
  std::vector<IndexEntry> e;
  if (!c.eat('}')) {
    do {
      c.expect('(');
      const double a = c.number();
      c.expect(',');
      const double k = c.number();
      if (k < 0 || k != std::floor(k)) c.fail("log power must be a natural number");
      c.expect(')');
      e.push_back({a, static_cast<int>(k)});
    } while (c.eat(','));
    c.expect('}');
  }
  double trunc = INFINITY;
  if (c.eat('+')) {
    if (!c.eat_word("trunc")) c.fail("expected trunc");
    c.expect('(');
    trunc = c.number();
    c.expect(')');
  }
  if (!c.done()) c.fail("trailing characters");
  return IndexSet(std::move(e), trunc);
}

IndexSet shift(const IndexSet& s, double a) {
  std::vector<IndexEntry> e = s.entries();
  for (auto& x : e) x.order += a;
  return IndexSet(std::move(e), s.truncation() + a);
}

IndexSet set_union(const IndexSet& s, const IndexSet& t) {
  std::vector<IndexEntry> e = s.entries();
  e.insert(e.end(), t.entries().begin(), t.entries().end());
  return IndexSet(std::move(e), std::min(s.truncation(), t.truncation()));
}

std::optional<IndexEntry> min_order(const IndexSet& s) {
  if (s.empty()) return std::nullopt;
  IndexEntry best = s.entries().front();
  for (const auto& e : s.entries())
    if (e.order == best.order && e.logpower > best.logpower) best = e;
  return best;
}

const char* face_name(Face f) {
  switch (f) {
    case Face::zf: return "zf";
    case Face::bf0: return "bf0";
    case Face::rb0: return "rb0";
    case Face::lb0: return "lb0";
    case Face::sc: return "sc";
    case Face::bf: return "bf";
    case Face::lb: return "lb";
    case Face::rb: return "rb";
  }
  return "?";
}

bool m_prime_condition(int n, double m_prime) {
  if (n >= 3 && n <= 5) return m_prime > (5.0 - n) / 2.0;
  return n >= 6;
}

IndexFamily theorem_index_family(Theorem thm, int n, double m_prime, bool enforce_hypotheses) {
  if (n < 3) throw PreconditionError("theorem_index_family: n must be >= 3");
  IndexFamily fam;
  fam[Face::bf] = IndexSet();
  fam[Face::lb] = IndexSet();
  fam[Face::rb] = IndexSet();
  fam[Face::sc] = IndexSet({{0, 0}}, 0);
  if (thm == Theorem::dim3_full) {
    if (n != 3) throw PreconditionError("dim3_full family exists only for n = 3");
    fam[Face::zf] = IndexSet({{-2, 0}}, -2);
    fam[Face::bf0] = IndexSet({{-2, 0}}, -2);
    fam[Face::rb0] = IndexSet({{-1.5, 0}}, -1.5);
    fam[Face::lb0] = fam[Face::rb0];
    return fam;
  }
  if (m_prime < 0 || m_prime > 2) throw PreconditionError("theorem_index_family: m' must lie in [0,2]");
  if (enforce_hypotheses && !m_prime_condition(n, m_prime)) {
    std::ostringstream os;
    os << "hypothesis m' > (5-n)/2 for n=3,4,5 violated (n=" << n << ", m'=" << m_prime << ")";
    throw PreconditionError(os.str());
  }
  const double b = n / 2.0 - 4.0 + m_prime;
  fam[Face::rb0] = IndexSet({{b, 0}}, b);
  fam[Face::lb0] = fam[Face::rb0];
  if (thm == Theorem::euclidean_nullspace) {
    fam[Face::zf] = IndexSet({{-2, 0}, {-1, 0}, {0, 0}, {0, 1}}, 0);
    fam[Face::bf0] = IndexSet({{-2, 0}}, -2);
  } else {
    fam[Face::zf] = IndexSet({{-2, 0}, {-1, 0}}, -1);
    fam[Face::bf0] = IndexSet({{-2, 0}, {-1, 0}}, -1);
  }
  return fam;
}

IndexFamily fractional_index_family(int n, double nu, bool resonance) {
  if (n < 3) throw PreconditionError("fractional_index_family: n must be >= 3");
  if (!(nu > 0)) throw PreconditionError("fractional_index_family: nu must be positive");
  if (resonance && !(nu < 1)) throw PreconditionError("fractional_index_family: resonances need nu < 1");
  if (!resonance && !(nu > 1 && nu < 2)) throw PreconditionError("fractional_index_family: zero modes need 1 < nu < 2");
  IndexFamily fam;
  fam[Face::bf] = IndexSet();
  fam[Face::lb] = IndexSet();
  fam[Face::rb] = IndexSet();
  fam[Face::sc] = IndexSet({{0, 0}}, 0);
  const IndexSet zf = resonance ? IndexSet({{-2 * nu, 0}}, -2 * nu) : IndexSet({{-2, 0}, {2 * nu - 4, 0}}, 2 * nu - 4);
  fam[Face::zf] = zf;
  fam[Face::bf0] = zf;
  return fam;
}

}  // namespace rlab
