#pragma once

#include <cstdint>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "augsearch/error.hpp"

namespace augsearch::json_util {

// Reads the keys of one config object; finish() rejects any key that was
// never asked for.
class ObjectReader {
 public:
  ObjectReader(const nlohmann::json& object, std::string section) : object_(object), section_(std::move(section)) {
    if (!object_.is_object()) fail(ErrorKind::Config, section_ + ": expected an object");
  }

  template <typename Fn>
  bool read(const std::string& key, Fn&& fn) {
    seen_.insert(key);
    auto it = object_.find(key);
    if (it == object_.end()) return false;
    fn(*it);
    return true;
  }

  void number(const std::string& key, double& out) {
    read(key, [&](const nlohmann::json& v) {
      if (!v.is_number()) fail(ErrorKind::Config, path(key) + ": expected a number");
      out = v.get<double>();
    });
  }

  template <typename Int>
  void integer(const std::string& key, Int& out) {
    read(key, [&](const nlohmann::json& v) {
      if (!v.is_number_integer()) fail(ErrorKind::Config, path(key) + ": expected an integer");
      if constexpr (std::is_unsigned_v<Int>) {
        if (v.is_number_unsigned()) out = static_cast<Int>(v.get<std::uint64_t>());
        else if (v.get<std::int64_t>() < 0) fail(ErrorKind::Config, path(key) + ": expected a non-negative integer");
        else out = static_cast<Int>(v.get<std::int64_t>());
      } else {
        out = static_cast<Int>(v.get<std::int64_t>());
      }
    });
  }

  void string(const std::string& key, std::string& out) {
    read(key, [&](const nlohmann::json& v) {
      if (!v.is_string()) fail(ErrorKind::Config, path(key) + ": expected a string");
      out = v.get<std::string>();
    });
  }

  void finish() const {
    for (auto it = object_.begin(); it != object_.end(); ++it)
      if (!seen_.count(it.key())) fail(ErrorKind::Config, "unknown key '" + path(it.key()) + "'");
  }

  std::string path(const std::string& key) const { return section_ + "." + key; }

 private:
  const nlohmann::json& object_;
  std::string section_;
  std::set<std::string> seen_;
};

}  // namespace augsearch::json_util
