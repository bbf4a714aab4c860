#include "streamlab/decoder.hpp"

#include <algorithm>

#include "streamlab/errors.hpp"
#include "streamlab/rng.hpp"

namespace streamlab {

CodedCombo make_random_combo(std::vector<PacketIndex> support, std::uint64_t slot,
                             std::uint64_t key) {
  if (support.empty()) throw InvalidArgument("combination needs a non-empty support");
  const CounterRng rng(key, stream_id(Stream::kCoefficients, slot));
  CodedCombo combo{std::move(support), {}, slot};
  combo.coefficients.reserve(combo.support.size());
  for (std::size_t j = 0; j < combo.support.size(); ++j) {
    combo.coefficients.push_back(gf::nonzero_from(rng.at(j)));
  }
  return combo;
}

int prefix_rank(std::span<const int> widths) {
  int pivots = 0;
  for (int w : widths) {
    if (w > pivots) ++pivots;
  }
  return pivots;
}

int prefix_decodable_count(std::span<const int> widths) {
  if (widths.empty()) return 0;
  int best = 0;
  int pivots = 0;
  std::size_t j = 0;
  for (int m = 1; m <= widths.back(); ++m) {
    while (j < widths.size() && widths[j] <= m) {
      if (widths[j] > pivots) ++pivots;
      ++j;
    }
    if (pivots == m) best = m;
  }
  return best;
}

RankResult generic_rank(std::span<const CodedCombo> combos, std::span<const PacketIndex> unknowns) {
  std::vector<PacketIndex> cols(unknowns.begin(), unknowns.end());
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  const std::size_t n = cols.size();

  std::vector<std::vector<gf::Element>> m;
  m.reserve(combos.size());
  for (const auto& combo : combos) {
    std::vector<gf::Element> row(n, 0);
    for (std::size_t j = 0; j < combo.support.size(); ++j) {
      const auto it = std::lower_bound(cols.begin(), cols.end(), combo.support[j]);
      if (it != cols.end() && *it == combo.support[j]) {
        auto& cell = row[static_cast<std::size_t>(it - cols.begin())];
        cell = gf::add(cell, combo.coefficients[j]);
      }
    }
    m.push_back(std::move(row));
  }

  std::size_t rank = 0;
  for (std::size_t col = 0; col < n && rank < m.size(); ++col) {
    std::size_t piv = rank;
    while (piv < m.size() && m[piv][col] == 0) ++piv;
    if (piv == m.size()) continue;
    std::swap(m[piv], m[rank]);
    const gf::Element inv = gf::inverse(m[rank][col]);
    for (auto& v : m[rank]) v = gf::mul(v, inv);
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r == rank || m[r][col] == 0) continue;
      const gf::Element f = m[r][col];
      for (std::size_t c = col; c < n; ++c) {
        m[r][c] = gf::sub(m[r][c], gf::mul(f, m[rank][c]));
      }
    }
    ++rank;
  }

  RankResult result{rank, {}};
  for (std::size_t r = 0; r < rank; ++r) {
    std::size_t nonzero = 0, where = 0;
    for (std::size_t c = 0; c < n; ++c) {
      if (m[r][c] != 0) {
        ++nonzero;
        where = c;
      }
    }
    if (nonzero == 1) result.determined.push_back(cols[where]);
  }
  std::sort(result.determined.begin(), result.determined.end());
  return result;
}

gf::Element SparseRow::at(PacketIndex index) const {
  const auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                                   [](const Entry& e, PacketIndex i) { return e.index < i; });
  return it != entries_.end() && it->index == index ? it->coeff : 0;
}

void SparseRow::scale(gf::Element f) {
  for (auto& e : entries_) e.coeff = gf::mul(e.coeff, f);
}

void SparseRow::axpy(gf::Element f, const SparseRow& other) {
  std::vector<Entry> out;
  out.reserve(entries_.size() + other.entries_.size());
  auto a = entries_.begin();
  auto b = other.entries_.begin();
  while (a != entries_.end() || b != other.entries_.end()) {
    if (b == other.entries_.end() || (a != entries_.end() && a->index < b->index)) {
      out.push_back(*a++);
    } else if (a == entries_.end() || b->index < a->index) {
      out.push_back({b->index, gf::mul(f, b->coeff)});
      ++b;
    } else {
      const gf::Element v = gf::add(a->coeff, gf::mul(f, b->coeff));
      if (v != 0) out.push_back({a->index, v});
      ++a;
      ++b;
    }
  }
  entries_ = std::move(out);
}

void SeenSet::insert(PacketIndex k) {
  if (contains(k)) return;
  if (k != prefix_ + 1) {
    above_.insert(k);
    return;
  }
  ++prefix_;
  auto it = above_.begin();
  while (it != above_.end() && *it == prefix_ + 1) {
    ++prefix_;
    it = above_.erase(it);
  }
}

std::vector<PacketIndex> SeenSet::lowest_unseen(std::size_t count) const {
  std::vector<PacketIndex> out;
  out.reserve(count);
  auto it = above_.begin();
  for (PacketIndex k = prefix_ + 1; out.size() < count; ++k) {
    while (it != above_.end() && *it < k) ++it;
    if (it != above_.end() && *it == k) continue;
    out.push_back(k);
  }
  return out;
}

IngestResult ReceiverState::ingest(const CodedCombo& combo, bool received) {
  if (!received) return {};
  std::vector<SparseRow::Entry> entries;
  entries.reserve(combo.support.size());
  for (std::size_t j = 0; j < combo.support.size(); ++j) {
    if (!decoded(combo.support[j])) entries.push_back({combo.support[j], combo.coefficients[j]});
  }
  SparseRow v(std::move(entries));

  // Pivot columns of other rows are zero, so one pass over v's current
  // pivot hits is enough.
  std::vector<PacketIndex> hits;
  for (const auto& e : v.entries()) {
    if (rows_.count(e.index)) hits.push_back(e.index);
  }
  for (PacketIndex q : hits) {
    const gf::Element f = v.at(q);
    if (f != 0) v.axpy(gf::neg(f), rows_.at(q));
  }
  if (v.empty()) return {};

  const PacketIndex pivot = v.front().index;
  v.scale(gf::inverse(v.front().coeff));

  std::vector<PacketIndex> touched{pivot};
  for (auto& [key, row] : rows_) {
    const gf::Element f = row.at(pivot);
    if (f != 0) {
      row.axpy(gf::neg(f), v);
      touched.push_back(key);
    }
  }
  rows_.emplace(pivot, std::move(v));

  for (PacketIndex key : touched) {
    const auto it = rows_.find(key);
    if (it->second.size() == 1) {
      decoded_above_.insert(key);
      rows_.erase(it);
    }
  }

  IngestResult result{0, true};
  while (decoded_above_.erase(delivered_ + 1)) {
    ++delivered_;
    ++result.delivered;
  }
  return result;
}

void ReceiverState::mark_seen(const CodedCombo& combo, bool received) {
  if (!received) return;
  if (combo.support != seen_at_feedback_.lowest_unseen(combo.support.size())) {
    throw ModelViolation("combination support is not a prefix of the unseen packets");
  }
  std::vector<SparseRow::Entry> entries;
  entries.reserve(combo.support.size());
  for (std::size_t j = 0; j < combo.support.size(); ++j) {
    entries.push_back({combo.support[j], combo.coefficients[j]});
  }
  SparseRow v(std::move(entries));
  while (!v.empty()) {
    const auto it = block_rows_.find(v.back().index);
    if (it == block_rows_.end()) break;
    v.axpy(gf::neg(v.back().coeff), it->second);
  }
  if (v.empty()) return;
  const PacketIndex top = v.back().index;
  v.scale(gf::inverse(v.back().coeff));
  block_rows_.emplace(top, std::move(v));
  seen_.insert(top);
}

void ReceiverState::feedback_boundary() {
  seen_at_feedback_ = seen_;
  block_rows_.clear();
}

}  // namespace streamlab
