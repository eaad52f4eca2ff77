#ifndef DNNRE_TRAIN_CHECKPOINT_H_
#define DNNRE_TRAIN_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dnnre/corpus/corpus.h"
#include "dnnre/model/dynnet.h"
#include "dnnre/train/train.h"

// Binary layout: 8-byte magic, one version byte, then tagged sections
// (4-byte tag, u64 length, payload). Integers and doubles are little-endian.
namespace dnnre {

inline constexpr std::uint8_t kCheckpointVersion = 1;

struct Checkpoint {
  std::string config_text;  // resolved run configuration
  ModelParams params;
  AdadeltaState optimizer;
  std::string rng_state;
  Vocabulary vocab;
  RelationTable relations;
  std::vector<int> train_counts;
};

std::uint64_t config_hash(const std::string& config_text);

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
// Throws SchemaError on a bad magic, version, layout or config hash.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dnnre

#endif  // DNNRE_TRAIN_CHECKPOINT_H_
