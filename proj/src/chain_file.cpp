#include "chainclass/chain_file.hpp"

#include <cstring>
#include <iterator>

namespace chainclass {

namespace {

constexpr char kMagic[8] = {'C', 'H', 'A', 'I', 'N', 'C', 'L', 'S'};

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
               static_cast<char>(v)};
  out.write(b, 4);
}

void put_record(std::ostream& out, const Bytes& data) {
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
}

struct Reader {
  const Bytes& data;
  std::size_t pos = 0;

  bool done() const { return pos == data.size(); }
  std::optional<std::uint32_t> u32() {
    if (data.size() - pos < 4) return std::nullopt;
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | data[pos + i];
    pos += 4;
    return v;
  }
  std::optional<ByteView> record() {
    auto len = u32();
    if (!len || data.size() - pos < *len) return std::nullopt;
    ByteView v(data.data() + pos, *len);
    pos += *len;
    return v;
  }
};

// Parses as far as possible; `error_at` is the record index that failed.
struct Parsed {
  std::optional<ChainSpec> spec;
  std::vector<Block> blocks;
  std::optional<std::uint64_t> error_at;
  std::string error;
};

Parsed parse(const std::filesystem::path& path) {
  Parsed p;
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    p.error = "cannot open " + path.string();
    return p;
  }
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (data.size() < 12 || std::memcmp(data.data(), kMagic, 8) != 0) {
    p.error = "missing chain file header";
    return p;
  }
  Reader r{data, 8};
  auto version = r.u32();
  if (version != kChainFileVersion) {
    p.error = "unsupported chain file version";
    return p;
  }
  auto spec = r.record();
  if (!spec) {
    p.error = "truncated chain spec";
    return p;
  }
  try {
    p.spec = ChainSpec::decode(*spec);
  } catch (const Error& e) {
    p.error = std::string("chain spec: ") + e.what();
    return p;
  }
  while (!r.done()) {
    auto idx = p.blocks.size();
    auto rec = r.record();
    if (!rec) {
      p.error_at = idx;
      p.error = "truncated block record";
      return p;
    }
    try {
      p.blocks.push_back(Block::decode(*rec));
    } catch (const Error& e) {
      p.error_at = idx;
      p.error = e.what();
      return p;
    }
  }
  return p;
}

}  // namespace

ChainFileWriter::ChainFileWriter(const std::filesystem::path& path, const ChainSpec& spec, const Block& genesis)
    : out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw Error(Errc::CorruptFile, "cannot create " + path.string());
  out_.write(kMagic, 8);
  put_u32(out_, kChainFileVersion);
  put_record(out_, spec.encode());
  put_record(out_, genesis.encode());
  out_.flush();
}

ChainFileWriter::ChainFileWriter(const std::filesystem::path& path)
    : out_(path, std::ios::binary | std::ios::app) {
  if (!out_) throw Error(Errc::CorruptFile, "cannot open " + path.string());
}

void ChainFileWriter::append(const Block& block) {
  put_record(out_, block.encode());
  out_.flush();
}

void write_chain_file(const std::filesystem::path& path, const Chain& chain) {
  ChainFileWriter w(path, chain.spec(), chain.block(0));
  for (std::uint64_t h = 1; h <= chain.height(); ++h) w.append(chain.block(h));
}

ChainFile read_chain_file(const std::filesystem::path& path) {
  auto p = parse(path);
  if (!p.spec || p.error_at) {
    std::string where = p.error_at ? "record " + std::to_string(*p.error_at) + ": " : "";
    throw Error(Errc::CorruptFile, where + p.error);
  }
  return ChainFile{std::move(*p.spec), std::move(p.blocks)};
}

ChainVerification verify_chain_file(const std::filesystem::path& path) {
  ChainVerification v;
  auto p = parse(path);
  if (!p.spec) {
    v.status = Status::fail(Errc::CorruptFile, p.error);
    return v;
  }
  std::optional<Chain> chain;
  try {
    chain.emplace(*p.spec);
  } catch (const Error& e) {
    v.status = Status::fail(e.code(), e.detail());
    return v;
  }
  if (p.blocks.empty()) {
    v.status = p.error_at ? Status::fail(Errc::CorruptFile, p.error) : Status::fail(Errc::CorruptFile, "no genesis");
    v.bad_height = 0;
    return v;
  }
  if (p.blocks.front().index != 0 || p.blocks.front().hash() != chain->head_hash() ||
      p.blocks.front() != chain->head()) {
    v.status = Status::fail(Errc::BadLink, "genesis does not match chain spec");
    v.bad_height = 0;
    return v;
  }
  v.blocks = 1;
  for (std::size_t i = 1; i < p.blocks.size(); ++i) {
    if (auto s = chain->append(p.blocks[i]); !s) {
      v.status = s;
      v.bad_height = i;
      break;
    }
    ++v.blocks;
  }
  if (v.status && p.error_at) {
    v.status = Status::fail(Errc::CorruptFile, p.error);
    v.bad_height = *p.error_at;
  }
  v.head_state_root = compute_state_root(chain->head_state());
  v.head_hash = chain->head_hash();
  return v;
}

}  // namespace chainclass
