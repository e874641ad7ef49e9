#include "gdfactor/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gdfactor/error.hpp"

namespace gdfactor {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> list_items(std::string_view raw, const std::string& key) {
  std::string_view body = trim(raw);
  if (body.size() >= 2 && body.front() == '[' && body.back() == ']') {
    body = body.substr(1, body.size() - 2);
  } else if (!body.empty() && (body.front() == '[' || body.back() == ']')) {
    throw ConfigError("config: unbalanced brackets in '" + key + "'");
  }
  std::vector<std::string_view> out;
  if (trim(body).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = body.find(',', start);
    const auto item = trim(body.substr(start, comma == std::string_view::npos ? body.npos : comma - start));
    if (item.empty()) throw ConfigError("config: empty list item in '" + key + "'");
    out.push_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

double parse_double(std::string_view text, std::string_view what) {
  text = trim(text);
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError("config: '" + std::string(what) + "' expects a number, got '" + std::string(text) + "'");
  }
  return v;
}

std::uint64_t parse_u64(std::string_view text, std::string_view what) {
  text = trim(text);
  std::uint64_t v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("config: '" + std::string(what) + "' expects a nonnegative integer, got '" +
                      std::string(text) + "'");
  }
  return v;
}

Config Config::parse(std::string_view text, const std::string& source) {
  Config cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(line_no) + ": missing key");
    cfg.set(std::string(key), std::string(value));
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

void Config::set(const std::string& key, const std::string& value) { values_[key] = value; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_double(it->second, key);
}

std::size_t Config::get_size(const std::string& key, std::size_t fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : static_cast<std::size_t>(parse_u64(it->second, key));
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_u64(it->second, key);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config: '" + key + "' expects true/false, got '" + v + "'");
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  for (auto item : list_items(it->second, key)) out.push_back(parse_double(item, key));
  if (out.empty()) throw ConfigError("config: '" + key + "' must not be empty");
  return out;
}

std::vector<std::size_t> Config::get_sizes(const std::string& key, const std::vector<std::size_t>& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<std::size_t> out;
  for (auto item : list_items(it->second, key)) out.push_back(static_cast<std::size_t>(parse_u64(item, key)));
  if (out.empty()) throw ConfigError("config: '" + key + "' must not be empty");
  return out;
}

void Config::require_known(const std::set<std::string>& known) const {
  for (const auto& [key, value] : values_) {
    if (!known.count(key)) throw ConfigError("config: unknown key '" + key + "'");
  }
}

std::vector<std::string> Config::echo() const {
  std::vector<std::string> out;
  out.reserve(values_.size());
  for (const auto& [key, value] : values_) out.push_back(key + " = " + value);
  return out;
}

}  // namespace gdfactor
