#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pathgp/graph.hpp"

namespace pathgp::cli {

/// Strict key-value experiment config: `key = value` lines, `#` comments.
/// Every key must be consumed by a typed getter; finish() rejects leftovers,
/// so typos never pass silently.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  /// Parses a config file; syntax problems raise ConfigError with the line.
  static KeyValueConfig from_file(const std::string& path);

  /// Inserts or replaces a key (flag overrides; line number 0).
  void set(const std::string& key, const std::string& value);

  [[nodiscard]] bool has(const std::string& key) const;

  /// Returns the value and marks the key consumed.
  [[nodiscard]] std::string take(const std::string& key);

  /// Throws ConfigError naming the first key never consumed.
  void finish() const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
    bool consumed = false;
  };
  std::map<std::string, Entry> entries_;
};

/// Conversions shared by flags and config values; all failures raise
/// ConfigError naming the field.
[[nodiscard]] double to_double(const std::string& field,
                               const std::string& text);
[[nodiscard]] int to_int(const std::string& field, const std::string& text);
[[nodiscard]] bool to_bool(const std::string& field, const std::string& text);
[[nodiscard]] std::vector<double> to_double_list(const std::string& field,
                                                 const std::string& text);

/// Loads an undirected edge list of `i,j,weight` lines.  Symmetric
/// duplicates with equal weight collapse to one edge; self-loops,
/// non-positive weights, and weight conflicts raise InvalidEdgeError with
/// the line, malformed lines raise ParseError.
[[nodiscard]] graph::WeightedGraph load_graph_edgelist(const std::string& path);

/// Shortest-repr-then-17-significant-digit formatting; round-trips exactly.
[[nodiscard]] std::string format_double(double value);

/// Writes header + rows, each newline-terminated; raises IoError on failure.
void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::string>& rows);

/// Worker cap: GP_THREADS if set (positive integer, else ConfigError),
/// otherwise the hardware concurrency, at least 1.
[[nodiscard]] int thread_count();

/// Runs fn(0..count-1) on up to thread_count() workers and blocks until all
/// complete.  Callers keep determinism by writing results into per-index
/// slots.  The first exception, if any, is rethrown after the join.
void parallel_for(int count, const std::function<void(int)>& fn);

}  // namespace pathgp::cli
