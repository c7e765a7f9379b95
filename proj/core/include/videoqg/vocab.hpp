#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "videoqg/errors.hpp"

namespace videoqg {

// Bidirectional token map with fixed reserved ids.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;

  Vocabulary();

  // Appends a new token and returns its id; throws if already present.
  int add(const std::string& token);
  // Id of token, or kUnk when absent.
  int lookup(const std::string& token) const;
  bool contains(const std::string& token) const { return ids_.count(token) > 0; }
  const std::string& token(int id) const;
  int size() const { return static_cast<int>(tokens_.size()); }

  std::vector<std::string> encode_lines() const;  // one token per line, id = line index
  static Vocabulary from_lines(const std::vector<std::string>& lines);

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

std::string detokenize(const Vocabulary& vocab, const std::vector<int>& ids);

}  // namespace videoqg
