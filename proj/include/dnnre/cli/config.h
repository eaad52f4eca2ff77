#ifndef DNNRE_CLI_CONFIG_H_
#define DNNRE_CLI_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dnnre/corpus/synth.h"
#include "dnnre/eval/evaluate.h"
#include "dnnre/model/dynnet.h"
#include "dnnre/train/train.h"

namespace dnnre {

// Flat run configuration: one `key = value` per line, `#` starts a comment.
// Keys are dotted (synth.noise_rate, train.epochs, ...); the set of keys is
// fixed and anything else is rejected with its line number.
class RunConfig {
 public:
  RunConfig() = default;

  static RunConfig parse(std::string_view text, const std::string& source = "config");
  static RunConfig load(const std::filesystem::path& path);

  // Known keys with their default values, in sorted order.
  static const std::map<std::string, std::string>& defaults();

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get(const std::string& key) const;
  // ConfigError naming the key when it was not given.
  void require(const std::string& key) const;

  double number(const std::string& key) const;
  std::size_t count(const std::string& key) const;
  std::uint64_t seed() const;
  bool flag(const std::string& key) const;
  std::vector<std::string> list(const std::string& key) const;
  std::filesystem::path path(const std::string& key) const;

  // Every key with its effective value, sorted.
  std::string resolved_text() const;
  // Only the keys whose prefix is listed ("train." or an exact key).
  std::string resolved_text(const std::vector<std::string>& prefixes) const;

  const std::map<std::string, std::string>& explicit_values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// Non-negative integer value of `text`; ConfigError naming `key` otherwise.
std::uint64_t parse_unsigned(const std::string& key, const std::string& text);

SynthConfig synth_config(const RunConfig& cfg);
ModelConfig model_config(const RunConfig& cfg);
TrainConfig train_config(const RunConfig& cfg);
VariantFlags variant_flags(const RunConfig& cfg);
EvalOptions eval_options(const RunConfig& cfg);

}  // namespace dnnre

#endif  // DNNRE_CLI_CONFIG_H_
