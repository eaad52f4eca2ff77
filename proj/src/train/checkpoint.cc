#include "dnnre/train/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "dnnre/errors.h"
#include "dnnre/random.h"

namespace dnnre {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint code assumes little-endian");

constexpr char kMagic[8] = {'D', 'N', 'N', 'R', 'E', '\0', 'C', 'K'};

class Writer {
 public:
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str(const std::string& s) {
    u64(s.size());
    buf_ += s;
  }
  void raw(const void* p, std::size_t n) { buf_.append(static_cast<const char*>(p), n); }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}
  std::uint64_t u64() {
    std::uint64_t v;
    raw(&v, sizeof v);
    return v;
  }
  double f64() {
    double v;
    raw(&v, sizeof v);
    return v;
  }
  std::string str() {
    const auto n = u64();
    need(n);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  void raw(void* p, std::size_t n) {
    need(n);
    std::memcpy(p, data_.data() + pos_, n);
    pos_ += n;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::uint64_t n) const {
    if (n > data_.size() - pos_) throw SchemaError("checkpoint truncated");
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

void section(Writer& out, const char (&tag)[5], const std::string& payload) {
  out.raw(tag, 4);
  out.str(payload);
}

std::string strings_payload(const std::vector<std::string>& items) {
  Writer w;
  w.u64(items.size());
  for (const auto& s : items) w.str(s);
  return w.take();
}

std::vector<std::string> read_strings(const std::string& payload) {
  Reader r(payload);
  std::vector<std::string> out(r.u64());
  for (auto& s : out) s = r.str();
  return out;
}

std::string params_payload(const ModelParams& params) {
  Writer w;
  const auto refs = parameters(params);
  w.u64(refs.size());
  for (const auto& p : refs) {
    w.str(p.name);
    w.u64(p.tensor.rank());
    for (std::size_t d : p.tensor.shape()) w.u64(d);
    for (double v : p.tensor.values()) w.f64(v);
  }
  w.u64(static_cast<std::uint64_t>(params.encoder.max_distance));
  return w.take();
}

void read_params(const std::string& payload, ModelParams& params) {
  Reader r(payload);
  std::map<std::string, Tensor> named;
  const auto count = r.u64();
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name = r.str();
    Shape shape(r.u64());
    for (auto& d : shape) d = r.u64();
    std::vector<double> values(nk::shape_size(shape));
    for (double& v : values) v = r.f64();
    named.emplace(std::move(name), Tensor(shape, std::move(values), true));
  }
  params.encoder.max_distance = static_cast<int>(r.u64());
  auto take = [&](const std::string& name) {
    auto it = named.find(name);
    if (it == named.end()) throw SchemaError("checkpoint lacks parameter " + name);
    Tensor t = it->second;
    named.erase(it);
    return t;
  };
  auto layer = [&](const std::string& prefix) {
    return TwoLayer{take(prefix + ".w1"), take(prefix + ".b1"), take(prefix + ".w2"),
                    take(prefix + ".b2")};
  };
  params.encoder.word_emb = take("encoder.word_emb");
  params.encoder.pos_emb1 = take("encoder.pos_emb1");
  params.encoder.pos_emb2 = take("encoder.pos_emb2");
  params.encoder.kernels = take("encoder.kernels");
  params.encoder.kernel_bias = take("encoder.kernel_bias");
  params.encoder.proj_weight = take("encoder.proj_weight");
  params.encoder.proj_bias = take("encoder.proj_bias");
  params.generator.type_emb = take("generator.type_emb");
  params.generator.w_t = take("generator.w_t");
  params.generator.f_t = layer("generator.f_t");
  params.generator.f_d_att = layer("generator.f_d_att");
  params.generator.f_d_cls = layer("generator.f_d_cls");
  params.att = take("classes.att");
  params.cls = take("classes.cls");
  params.cls_bias = take("classes.bias");
  if (!named.empty()) throw SchemaError("checkpoint has unknown parameter " + named.begin()->first);
}

std::string optimizer_payload(const AdadeltaState& s) {
  Writer w;
  w.u64(s.avg_sq_grad.size());
  for (std::size_t i = 0; i < s.avg_sq_grad.size(); ++i) {
    w.u64(s.avg_sq_grad[i].size());
    for (double v : s.avg_sq_grad[i]) w.f64(v);
    for (double v : s.avg_sq_delta[i]) w.f64(v);
  }
  return w.take();
}

AdadeltaState read_optimizer(const std::string& payload) {
  Reader r(payload);
  AdadeltaState s;
  const auto groups = r.u64();
  for (std::uint64_t i = 0; i < groups; ++i) {
    const auto n = r.u64();
    std::vector<double> g(n), d(n);
    for (double& v : g) v = r.f64();
    for (double& v : d) v = r.f64();
    s.avg_sq_grad.push_back(std::move(g));
    s.avg_sq_delta.push_back(std::move(d));
  }
  return s;
}

}  // namespace

std::uint64_t config_hash(const std::string& config_text) { return fnv1a64(config_text); }

std::string serialize_checkpoint(const Checkpoint& c) {
  Writer out;
  out.raw(kMagic, sizeof kMagic);
  out.raw(&kCheckpointVersion, 1);
  {
    Writer w;
    w.str(c.config_text);
    w.u64(config_hash(c.config_text));
    section(out, "CONF", w.take());
  }
  section(out, "PARM", params_payload(c.params));
  section(out, "OPTM", optimizer_payload(c.optimizer));
  section(out, "RNGS", c.rng_state);
  section(out, "VOCB", strings_payload(c.vocab.tokens()));
  section(out, "RELS", strings_payload(c.relations.names()));
  {
    Writer w;
    w.u64(c.train_counts.size());
    for (int v : c.train_counts) w.u64(static_cast<std::uint64_t>(v));
    section(out, "CNTS", w.take());
  }
  return out.take();
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  char magic[8];
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0) throw SchemaError("not a checkpoint file");
  std::uint8_t version;
  r.raw(&version, 1);
  if (version != kCheckpointVersion) {
    throw SchemaError("unsupported checkpoint version " + std::to_string(version));
  }
  std::map<std::string, std::string> sections;
  while (!r.done()) {
    char tag[4];
    r.raw(tag, 4);
    sections[std::string(tag, 4)] = r.str();
  }
  auto get = [&](const char* tag) -> const std::string& {
    auto it = sections.find(tag);
    if (it == sections.end()) throw SchemaError(std::string("checkpoint lacks section ") + tag);
    return it->second;
  };
  Checkpoint c;
  {
    Reader conf(get("CONF"));
    c.config_text = conf.str();
    if (conf.u64() != config_hash(c.config_text)) {
      throw SchemaError("checkpoint config hash does not match its config text");
    }
  }
  read_params(get("PARM"), c.params);
  c.optimizer = read_optimizer(get("OPTM"));
  c.rng_state = get("RNGS");
  c.vocab = Vocabulary::from_tokens(read_strings(get("VOCB")));
  c.relations = RelationTable(read_strings(get("RELS")));
  Reader counts(get("CNTS"));
  c.train_counts.resize(counts.u64());
  for (int& v : c.train_counts) v = static_cast<int>(counts.u64());
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  out << serialize_checkpoint(ckpt);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str());
}

}  // namespace dnnre
