#include "benchforge/prompts.hpp"

#include <map>

namespace benchforge::prompts {

std::string language_name(std::string_view code) {
  static const std::map<std::string_view, std::string_view> kNames = {
      {"eng", "English"},  {"vie", "Vietnamese"}, {"fra", "French"},   {"deu", "German"},
      {"spa", "Spanish"},  {"zho", "Chinese"},    {"jpn", "Japanese"}, {"kor", "Korean"},
      {"rus", "Russian"},  {"tha", "Thai"},       {"ind", "Indonesian"}, {"khm", "Khmer"},
      {"lao", "Lao"},      {"mya", "Burmese"},    {"tgl", "Tagalog"},  {"zsm", "Malay"},
  };
  const auto it = kNames.find(code.substr(0, 3));
  return it != kNames.end() ? std::string(it->second) : std::string(code);
}

}  // namespace benchforge::prompts
