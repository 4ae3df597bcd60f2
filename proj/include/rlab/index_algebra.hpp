#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rlab {

struct IndexEntry {
  double order;
  int logpower;
  auto operator<=>(const IndexEntry&) const = default;
};

class IndexSet {
 public:
  IndexSet() = default;
  IndexSet(std::vector<IndexEntry> entries, double truncation = std::numeric_limits<double>::infinity());

  const std::vector<IndexEntry>& entries() const { return entries_; }
  double truncation() const { return truncation_; }
  bool empty() const { return entries_.empty(); }
  bool log_bearing() const;
  // membership up to the truncation marker: anything above it is unspecified and admitted
  bool admits(double order, int logpower, double tol = 1e-9) const;

  std::string to_string() const;
  static IndexSet parse(const std::string& text);

  bool operator==(const IndexSet& o) const { return entries_ == o.entries_ && truncation_ == o.truncation_; }

 private:
  std::vector<IndexEntry> entries_;
  double truncation_ = std::numeric_limits<double>::infinity();
};

IndexSet shift(const IndexSet& s, double a);
IndexSet set_union(const IndexSet& s, const IndexSet& t);
std::optional<IndexEntry> min_order(const IndexSet& s);

enum class Face { zf, bf0, rb0, lb0, sc, bf, lb, rb };
const char* face_name(Face f);

using IndexFamily = std::map<Face, IndexSet>;

enum class Theorem { euclidean_nullspace, conic_nullspace, dim3_full };

// enforce_hypotheses=false is used only for cases the theorem text itself names as exceptions
IndexFamily theorem_index_family(Theorem thm, int n, double m_prime, bool enforce_hypotheses = true);

bool m_prime_condition(int n, double m_prime);

// zero-energy leading orders for a planted conic mode of order nu: k^{-2nu} (resonance) or k^{-2}, k^{2nu-4}
IndexFamily fractional_index_family(int n, double nu, bool resonance);

}  // namespace rlab
