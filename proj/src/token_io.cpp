#include <bit>
#include <cstring>
#include <string>

#include "mvlm/io.hpp"

namespace mvlm {

// The interchange format is little-endian; this implementation memcpy's
// scalars directly and is guarded against big-endian hosts at compile time.
static_assert(std::endian::native == std::endian::little,
              "token file writer assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'M', 'V', 'T', 'K'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void append(std::string& out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.append(bytes, sizeof(T));
}

class Cursor {
 public:
  Cursor(const std::string& bytes, const std::string& context)
      : bytes_(bytes), context_(context) {}

  template <typename T>
  T take() {
    if (offset_ + sizeof(T) > bytes_.size()) {
      throw ParseError(context_ + ": truncated at byte " + std::to_string(offset_),
                       static_cast<std::int64_t>(offset_));
    }
    T value;
    std::memcpy(&value, bytes_.data() + offset_, sizeof(T));
    offset_ += sizeof(T);
    return value;
  }

  void take_into(void* dst, std::size_t n) {
    if (offset_ + n > bytes_.size()) {
      throw ParseError(context_ + ": truncated at byte " + std::to_string(offset_),
                       static_cast<std::int64_t>(offset_));
    }
    std::memcpy(dst, bytes_.data() + offset_, n);
    offset_ += n;
  }

  std::size_t offset() const { return offset_; }
  std::size_t remaining() const { return bytes_.size() - offset_; }

 private:
  const std::string& bytes_;
  std::string context_;
  std::size_t offset_ = 0;
};

}  // namespace

void write_tokens(const std::filesystem::path& path, const TokenFile& file) {
  if (file.view_ids.empty()) {
    throw InputError("write_tokens: no views");
  }
  if (file.blocks.size() % file.view_ids.size() != 0) {
    throw InputError("write_tokens: block count is not a multiple of the view count");
  }
  if (!file.bounds.valid()) {
    throw InputError("write_tokens: invalid bounding box");
  }

  std::string out;
  const std::size_t block_bytes = sizeof(float) * kTokenCount * kTokenWidth;
  out.reserve(64 + 4 * file.view_ids.size() + block_bytes * file.blocks.size());

  out.append(kMagic, sizeof(kMagic));
  append<std::uint32_t>(out, kVersion);
  append<std::int64_t>(out, file.first_frame);
  append<std::uint32_t>(out, static_cast<std::uint32_t>(file.blocks.size() / file.view_ids.size()));
  append<std::uint32_t>(out, static_cast<std::uint32_t>(file.view_ids.size()));
  append<std::uint32_t>(out, static_cast<std::uint32_t>(kTokenCount));
  append<std::uint32_t>(out, static_cast<std::uint32_t>(kTokenWidth));
  for (int a = 0; a < 3; ++a) append<double>(out, file.bounds.min[a]);
  for (int a = 0; a < 3; ++a) append<double>(out, file.bounds.max[a]);
  for (int id : file.view_ids) append<std::int32_t>(out, id);

  for (const ConditioningTokenSet& block : file.blocks) {
    const char* data = reinterpret_cast<const char*>(block.tokens.data());
    out.append(data, block_bytes);  // row-major float32, contiguous
  }
  write_file(path, out);
}

TokenFile read_tokens(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const std::string context = "token file " + path.string();
  Cursor cursor(bytes, context);

  char magic[4];
  cursor.take_into(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError(context + ": bad magic", 0);
  }
  const auto version = cursor.take<std::uint32_t>();
  if (version != kVersion) {
    throw ParseError(context + ": unsupported version " + std::to_string(version));
  }

  TokenFile file;
  file.first_frame = cursor.take<std::int64_t>();
  const auto frame_count = cursor.take<std::uint32_t>();
  const auto view_count = cursor.take<std::uint32_t>();
  const auto token_count = cursor.take<std::uint32_t>();
  const auto token_width = cursor.take<std::uint32_t>();
  if (token_count != static_cast<std::uint32_t>(kTokenCount) ||
      token_width != static_cast<std::uint32_t>(kTokenWidth)) {
    throw ParseError(context + ": unexpected token shape " + std::to_string(token_count) + "x" +
                     std::to_string(token_width));
  }
  if (view_count == 0) {
    throw ParseError(context + ": zero views");
  }
  for (int a = 0; a < 3; ++a) file.bounds.min[a] = cursor.take<double>();
  for (int a = 0; a < 3; ++a) file.bounds.max[a] = cursor.take<double>();
  file.view_ids.resize(view_count);
  for (std::uint32_t v = 0; v < view_count; ++v) file.view_ids[v] = cursor.take<std::int32_t>();

  const std::size_t block_bytes = sizeof(float) * kTokenCount * kTokenWidth;
  file.blocks.resize(static_cast<std::size_t>(frame_count) * view_count);
  for (std::size_t f = 0; f < frame_count; ++f) {
    for (std::size_t v = 0; v < view_count; ++v) {
      ConditioningTokenSet& block = file.blocks[f * view_count + v];
      cursor.take_into(block.tokens.data(), block_bytes);
      block.frame_id = file.first_frame + static_cast<std::int64_t>(f);
      block.view_id = file.view_ids[v];
    }
  }
  if (cursor.remaining() != 0) {
    throw ParseError(context + ": trailing bytes after the last block",
                     static_cast<std::int64_t>(cursor.offset()));
  }
  return file;
}

}  // namespace mvlm
