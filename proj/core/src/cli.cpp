#include "pathgp/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <climits>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <utility>

#include "pathgp/errors.hpp"

namespace pathgp::cli {

namespace {

std::string trim(const std::string& s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) {
    ++begin;
  }
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) {
    --end;
  }
  return s.substr(begin, end - begin);
}

std::string strip_comment(const std::string& line) {
  auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  parts.push_back(current);
  return parts;
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  KeyValueConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string content = trim(strip_comment(line));
    if (content.empty()) continue;
    auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    std::string key = trim(content.substr(0, eq));
    std::string value = unquote(trim(content.substr(eq + 1)));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": empty key");
    }
    auto [it, inserted] = config.entries_.emplace(key, Entry{value, line_no, false});
    if (!inserted) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": duplicate key '" + key + "'");
    }
  }
  return config;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  entries_[key] = Entry{value, 0, false};
}

bool KeyValueConfig::has(const std::string& key) const {
  return entries_.count(key) > 0;
}

std::string KeyValueConfig::take(const std::string& key) {
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    throw ConfigError("missing required key '" + key + "'");
  }
  it->second.consumed = true;
  return it->second.value;
}

void KeyValueConfig::finish() const {
  for (const auto& [key, entry] : entries_) {
    if (!entry.consumed) {
      std::string where =
          entry.line > 0 ? " (line " + std::to_string(entry.line) + ")" : "";
      throw ConfigError("unknown key '" + key + "'" + where);
    }
  }
}

double to_double(const std::string& field, const std::string& text) {
  std::string t = trim(text);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ConfigError(field + ": '" + text + "' is not a number");
  }
  if (used != t.size()) {
    throw ConfigError(field + ": '" + text + "' is not a number");
  }
  return value;
}

int to_int(const std::string& field, const std::string& text) {
  std::string t = trim(text);
  std::size_t used = 0;
  long value = 0;
  try {
    value = std::stol(t, &used);
  } catch (const std::exception&) {
    throw ConfigError(field + ": '" + text + "' is not an integer");
  }
  if (used != t.size()) {
    throw ConfigError(field + ": '" + text + "' is not an integer");
  }
  if (value < INT_MIN || value > INT_MAX) {
    throw ConfigError(field + ": '" + text + "' is out of range");
  }
  return static_cast<int>(value);
}

bool to_bool(const std::string& field, const std::string& text) {
  std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(field + ": '" + text + "' is not a boolean");
}

std::vector<double> to_double_list(const std::string& field,
                                   const std::string& text) {
  std::vector<double> values;
  if (trim(text).empty()) return values;
  for (const std::string& part : split(text, ',')) {
    values.push_back(to_double(field, part));
  }
  return values;
}

graph::WeightedGraph load_graph_edgelist(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open edge list '" + path + "'");

  std::map<std::pair<int, int>, double> edges;
  int max_node = -1;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string content = trim(strip_comment(line));
    if (content.empty()) continue;
    std::vector<std::string> parts = split(content, ',');
    if (parts.size() != 3) {
      throw ParseError("edge list line " + std::to_string(line_no) +
                       ": expected 'i,j,weight'");
    }
    int i = 0;
    int j = 0;
    double w = 0.0;
    try {
      i = to_int("i", parts[0]);
      j = to_int("j", parts[1]);
      w = to_double("weight", parts[2]);
    } catch (const ConfigError& e) {
      throw ParseError("edge list line " + std::to_string(line_no) + ": " +
                       e.what());
    }
    if (i < 0 || j < 0) {
      throw InvalidEdgeError("edge list line " + std::to_string(line_no) +
                             ": negative node index");
    }
    if (i == j) {
      throw InvalidEdgeError("edge list line " + std::to_string(line_no) +
                             ": self-loop on node " + std::to_string(i));
    }
    if (!(w > 0.0)) {
      throw InvalidEdgeError("edge list line " + std::to_string(line_no) +
                             ": weight must be positive");
    }
    std::pair<int, int> key{std::min(i, j), std::max(i, j)};
    auto it = edges.find(key);
    if (it != edges.end()) {
      if (it->second != w) {
        throw InvalidEdgeError("edge list line " + std::to_string(line_no) +
                               ": conflicting weight for duplicate edge");
      }
      continue;
    }
    edges.emplace(key, w);
    max_node = std::max(max_node, std::max(i, j));
  }
  if (edges.empty()) throw ParseError("edge list '" + path + "' has no edges");

  std::vector<graph::Edge> list;
  list.reserve(edges.size());
  for (const auto& [key, w] : edges) {
    list.push_back(graph::Edge{key.first, key.second, w});
  }
  return graph::WeightedGraph(max_node + 1, list);
}

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::string>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << header << '\n';
  for (const std::string& row : rows) out << row << '\n';
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

int thread_count() {
  const char* env = std::getenv("GP_THREADS");
  if (env != nullptr && *env != '\0') {
    int value = to_int("GP_THREADS", env);
    if (value < 1) throw ConfigError("GP_THREADS must be a positive integer");
    return value;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int count, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  int workers = std::min(thread_count(), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }

  std::atomic<int> next(0);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto work = [&]() {
    while (true) {
      int i = next.fetch_add(1);
      if (i >= count) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace pathgp::cli
