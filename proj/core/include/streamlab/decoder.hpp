#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <unordered_set>
#include <vector>

#include "streamlab/gf.hpp"

namespace streamlab {

using PacketIndex = std::uint64_t;  // source packets are s_1, s_2, ...

struct CodedCombo {
  std::vector<PacketIndex> support;  // ascending
  std::vector<gf::Element> coefficients;
  std::uint64_t slot = 0;
};

// Fresh uniformly nonzero coefficients, a pure function of (key, slot).
CodedCombo make_random_combo(std::vector<PacketIndex> support, std::uint64_t slot,
                             std::uint64_t key);

// Width rules for combinations over nested prefixes of one unseen ordering.
// `widths` must be sorted ascending.
int prefix_rank(std::span<const int> widths);
int prefix_decodable_count(std::span<const int> widths);

struct RankResult {
  std::size_t rank = 0;
  std::vector<PacketIndex> determined;  // ascending
};

// Dense elimination over GF(2^31-1). Support entries outside `unknowns` are
// treated as already-decoded packets and dropped.
RankResult generic_rank(std::span<const CodedCombo> combos, std::span<const PacketIndex> unknowns);

class SparseRow {
 public:
  struct Entry {
    PacketIndex index;
    gf::Element coeff;
  };

  SparseRow() = default;
  explicit SparseRow(std::vector<Entry> entries) : entries_(std::move(entries)) {}

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const Entry& front() const { return entries_.front(); }
  const Entry& back() const { return entries_.back(); }
  const std::vector<Entry>& entries() const { return entries_; }

  gf::Element at(PacketIndex index) const;
  void scale(gf::Element f);
  // this += f * other
  void axpy(gf::Element f, const SparseRow& other);

 private:
  std::vector<Entry> entries_;
};

// Packets the transmitter may treat as seen: a fully seen prefix plus
// scattered seen packets above it.
class SeenSet {
 public:
  bool contains(PacketIndex k) const { return k <= prefix_ || above_.count(k) > 0; }
  void insert(PacketIndex k);
  std::size_t size() const { return prefix_ + above_.size(); }
  PacketIndex prefix() const { return prefix_; }
  std::vector<PacketIndex> lowest_unseen(std::size_t count) const;

  friend bool operator==(const SeenSet&, const SeenSet&) = default;

 private:
  PacketIndex prefix_ = 0;
  std::set<PacketIndex> above_;
};

struct IngestResult {
  std::uint64_t delivered = 0;
  bool innovative = false;
};

class ReceiverState {
 public:
  // Reduce, buffer, eliminate and release the in-order prefix.
  IngestResult ingest(const CodedCombo& combo, bool received);

  // Seen-packet bookkeeping: the reception marks the highest packet that the
  // receiver can now express through itself and lower packets.
  void mark_seen(const CodedCombo& combo, bool received);

  // The transmitter learns the seen set; seen tracking restarts.
  void feedback_boundary();

  PacketIndex delivered_prefix() const { return delivered_; }
  PacketIndex required() const { return delivered_ + 1; }
  bool decoded(PacketIndex k) const { return k <= delivered_ || decoded_above_.count(k) > 0; }
  std::size_t decoded_count() const { return delivered_ + decoded_above_.size(); }
  std::size_t buffered() const { return rows_.size(); }

  const SeenSet& seen() const { return seen_; }
  const SeenSet& seen_at_feedback() const { return seen_at_feedback_; }
  std::size_t seen_since_feedback() const { return seen_.size() - seen_at_feedback_.size(); }

 private:
  PacketIndex delivered_ = 0;
  std::unordered_set<PacketIndex> decoded_above_;
  std::map<PacketIndex, SparseRow> rows_;  // reduced echelon form, keyed by lowest index

  SeenSet seen_;
  SeenSet seen_at_feedback_;
  std::map<PacketIndex, SparseRow> block_rows_;  // keyed by highest index
};

}  // namespace streamlab
