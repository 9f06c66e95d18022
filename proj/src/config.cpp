#include "nck/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace nck {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void fail(const std::string& section, const std::string& key,
                       const std::string& what) {
  throw std::invalid_argument("config [" + section + "] " + key + ": " + what);
}

Scalar parse_scalar(const std::string& section, const std::string& key,
                    const std::string& value) {
  try {
    size_t used = 0;
    const Scalar v = std::stod(value, &used);
    if (used != value.size()) fail(section, key, "trailing characters in '" + value + "'");
    return v;
  } catch (const std::invalid_argument&) {
    fail(section, key, "not a number: '" + value + "'");
  } catch (const std::out_of_range&) {
    fail(section, key, "out of range: '" + value + "'");
  }
}

}  // namespace

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
    cfg.entries_.push_back({section, key, value});
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

const Config::Entry* Config::find(const std::string& section, const std::string& key) const {
  const Entry* hit = nullptr;
  for (const auto& e : entries_)
    if (e.section == section && e.key == key) hit = &e;  // last one wins
  return hit;
}

bool Config::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

std::string Config::get_string(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (e == nullptr) fail(section, key, "missing required entry");
  return e->value;
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  const Entry* e = find(section, key);
  return e ? e->value : fallback;
}

Scalar Config::get_scalar(const std::string& section, const std::string& key) const {
  return parse_scalar(section, key, get_string(section, key));
}

Scalar Config::get_scalar(const std::string& section, const std::string& key,
                          Scalar fallback) const {
  const Entry* e = find(section, key);
  return e ? parse_scalar(section, key, e->value) : fallback;
}

Index Config::get_index(const std::string& section, const std::string& key) const {
  const Scalar v = get_scalar(section, key);
  const Index i = static_cast<Index>(v);
  if (static_cast<Scalar>(i) != v) fail(section, key, "expected an integer");
  return i;
}

Index Config::get_index(const std::string& section, const std::string& key,
                        Index fallback) const {
  return has(section, key) ? get_index(section, key) : fallback;
}

bool Config::get_bool(const std::string& section, const std::string& key,
                      bool fallback) const {
  const Entry* e = find(section, key);
  if (e == nullptr) return fallback;
  if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
  if (e->value == "false" || e->value == "0" || e->value == "no") return false;
  fail(section, key, "expected a boolean, got '" + e->value + "'");
}

std::vector<Scalar> Config::get_scalars(const std::string& section,
                                        const std::string& key) const {
  std::vector<Scalar> values;
  std::istringstream in(get_string(section, key));
  std::string token;
  while (in >> token) values.push_back(parse_scalar(section, key, token));
  if (values.empty()) fail(section, key, "expected at least one value");
  return values;
}

std::vector<Scalar> Config::get_scalars(const std::string& section, const std::string& key,
                                        const std::vector<Scalar>& fallback) const {
  return has(section, key) ? get_scalars(section, key) : fallback;
}

std::vector<std::string> Config::get_strings(const std::string& section,
                                             const std::string& key) const {
  std::vector<std::string> values;
  std::istringstream in(get_string(section, key));
  std::string token;
  while (in >> token) values.push_back(token);
  if (values.empty()) fail(section, key, "expected at least one value");
  return values;
}

std::vector<std::string> Config::get_strings(const std::string& section,
                                             const std::string& key,
                                             const std::vector<std::string>& fallback) const {
  return has(section, key) ? get_strings(section, key) : fallback;
}

std::vector<std::string> Config::get_all(const std::string& section,
                                         const std::string& key) const {
  std::vector<std::string> values;
  for (const auto& e : entries_)
    if (e.section == section && e.key == key) values.push_back(e.value);
  return values;
}

void Config::set(const std::string& section, const std::string& key,
                 const std::string& value) {
  for (auto& e : entries_) {
    if (e.section == section && e.key == key) {
      e.value = value;
      return;
    }
  }
  entries_.push_back({section, key, value});
}

std::string Config::serialize() const {
  // Group by section, preserving first-appearance order.
  std::vector<std::string> order;
  for (const auto& e : entries_)
    if (std::find(order.begin(), order.end(), e.section) == order.end())
      order.push_back(e.section);
  std::ostringstream out;
  for (size_t s = 0; s < order.size(); ++s) {
    if (!order[s].empty()) out << '[' << order[s] << "]\n";
    for (const auto& e : entries_)
      if (e.section == order[s]) out << e.key << " = " << e.value << '\n';
    if (s + 1 < order.size()) out << '\n';
  }
  return out.str();
}

}  // namespace nck
