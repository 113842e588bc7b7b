#include "slotcnn/rel/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "slotcnn/error.hpp"

namespace slotcnn {

namespace {

constexpr std::string_view kMagic = "slotcnn-model";
constexpr int kVersion = 1;

class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  std::string next(const char* what) {
    std::string line;
    if (!std::getline(in_, line)) fail(std::string("unexpected end of file, expected ") + what);
    ++line_;
    return line;
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(source_, line_, msg); }

 private:
  std::istream& in_;
  std::string source_;
  long line_ = 0;
};

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void save_model(const Model& model, std::ostream& out) {
  const ModelDims& d = model.dims();
  out << kMagic << ' ' << kVersion << " variant=" << variant_name(model.variant())
      << " emb_dim=" << d.emb_dim << " filter_width=" << d.filter_width
      << " num_filters=" << d.num_filters << " hidden_rel=" << d.hidden_rel
      << " hidden_ent=" << d.hidden_ent << " seed=" << model.seed()
      << " slot=" << (model.binary_slot().empty() ? "-" : model.binary_slot()) << '\n';
  out << "vocab " << model.vocab().size() << '\n';
  for (const auto& tok : model.vocab().tokens()) out << tok << '\n';
  for (const auto& p : model.params()) {
    out << "param " << p.name << ' ' << p.value.rows() << ' ' << p.value.cols() << '\n';
    for (nn::Index i = 0; i < p.value.size(); ++i) out << format_double(p.value.data()[i]) << '\n';
  }
  out << "end\n";
}

void save_model(const Model& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model " + path);
  save_model(model, out);
  if (!out) throw IoError("failed writing model " + path);
}

Model load_model(std::istream& in, const std::string& source) {
  LineReader reader(in, source);
  std::istringstream header(reader.next("header"));
  std::string magic;
  int version = 0;
  header >> magic >> version;
  if (magic != kMagic) reader.fail("not a slotcnn model file");
  if (version != kVersion) reader.fail("unsupported model version " + std::to_string(version));
  std::map<std::string, std::string> fields;
  for (std::string kv; header >> kv;) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) reader.fail("malformed header field '" + kv + "'");
    fields[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  auto field = [&](const std::string& key) {
    auto it = fields.find(key);
    if (it == fields.end()) reader.fail("header lacks '" + key + "'");
    return it->second;
  };
  auto int_field = [&](const std::string& key) {
    try {
      return std::stoi(field(key));
    } catch (const std::logic_error&) {
      reader.fail("header field '" + key + "' is not an integer");
    }
  };

  const Variant variant = parse_variant(field("variant"));
  ModelDims dims;
  dims.emb_dim = int_field("emb_dim");
  dims.filter_width = int_field("filter_width");
  dims.num_filters = int_field("num_filters");
  dims.hidden_rel = int_field("hidden_rel");
  dims.hidden_ent = int_field("hidden_ent");
  std::uint64_t seed = 0;
  try {
    seed = std::stoull(field("seed"));
  } catch (const std::logic_error&) {
    reader.fail("header field 'seed' is not an integer");
  }
  std::string slot = field("slot");
  if (slot == "-") slot.clear();

  std::istringstream vocab_line(reader.next("vocab"));
  std::string tag;
  int vocab_size = -1;
  vocab_line >> tag >> vocab_size;
  if (tag != "vocab" || vocab_size < 4) reader.fail("expected 'vocab <n>'");
  data::Vocabulary vocab;
  for (int i = 0; i < vocab_size; ++i) {
    const std::string tok = reader.next("vocabulary token");
    if (i < 4) {
      if (tok != vocab.token(i)) reader.fail("reserved token mismatch at id " + std::to_string(i));
    } else if (vocab.add(tok) != i) {
      reader.fail("duplicate vocabulary token '" + tok + "'");
    }
  }

  Model model(variant, dims, std::move(vocab), seed, slot);
  size_t loaded = 0;
  while (true) {
    std::istringstream line(reader.next("param block or 'end'"));
    std::string kind, name;
    line >> kind;
    if (kind == "end") break;
    nn::Index rows = -1, cols = -1;
    line >> name >> rows >> cols;
    if (kind != "param" || name.empty()) reader.fail("expected 'param <name> <rows> <cols>'");
    if (!model.params().contains(name)) reader.fail("unexpected parameter '" + name + "'");
    nn::Param& p = model.params().at(name);
    if (rows != p.value.rows() || cols != p.value.cols())
      reader.fail("parameter '" + name + "' has shape " + std::to_string(rows) + "x" +
                  std::to_string(cols) + ", expected " + std::to_string(p.value.rows()) + "x" +
                  std::to_string(p.value.cols()));
    for (nn::Index i = 0; i < p.value.size(); ++i) {
      const std::string v = reader.next("parameter value");
      try {
        size_t used = 0;
        p.value.data()[i] = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
      } catch (const std::logic_error&) {
        reader.fail("bad value '" + v + "' in parameter '" + name + "'");
      }
    }
    ++loaded;
  }
  if (loaded != model.params().size())
    reader.fail("model file holds " + std::to_string(loaded) + " of " +
                std::to_string(model.params().size()) + " parameters");
  return model;
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model " + path);
  return load_model(in, path);
}

}  // namespace slotcnn
