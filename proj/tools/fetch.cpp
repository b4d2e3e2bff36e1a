#include "fetch.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string_view>

#include "tropfact/errors.hpp"

namespace tropfact::cli {

namespace {

constexpr const char* kHost = "https://files.grouplens.org";

struct Archive {
  const char* path;
  const char* member;
};

Archive archive_for(RatingsFormat format) {
  return format == RatingsFormat::kMl100k ? Archive{"/datasets/movielens/ml-100k.zip", "ml-100k/u.data"}
                                          : Archive{"/datasets/movielens/ml-1m.zip", "ml-1m/ratings.dat"};
}

std::uint32_t le32(std::string_view s, std::size_t at) {
  if (at + 4 > s.size()) throw ParseError("truncated zip archive");
  std::uint32_t v = 0;
  for (int k = 3; k >= 0; --k) v = (v << 8) | static_cast<unsigned char>(s[at + k]);
  return v;
}

std::uint16_t le16(std::string_view s, std::size_t at) {
  if (at + 2 > s.size()) throw ParseError("truncated zip archive");
  return static_cast<std::uint16_t>(static_cast<unsigned char>(s[at]) |
                                    (static_cast<unsigned char>(s[at + 1]) << 8));
}

std::string inflate_raw(std::string_view packed, std::size_t size) {
  std::string out(size, '\0');
  z_stream z{};
  if (inflateInit2(&z, -MAX_WBITS) != Z_OK) throw ParseError("zlib init failed");
  z.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(packed.data()));
  z.avail_in = static_cast<uInt>(packed.size());
  z.next_out = reinterpret_cast<Bytef*>(out.data());
  z.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&z, Z_FINISH);
  inflateEnd(&z);
  if (rc != Z_STREAM_END) throw ParseError("corrupt deflate stream in archive");
  return out;
}

// Reads one member through the central directory.
std::string extract_member(std::string_view zip, std::string_view name) {
  std::size_t eocd = std::string_view::npos;
  for (std::size_t at = zip.size() >= 22 ? zip.size() - 22 : 0;; --at) {
    if (le32(zip, at) == 0x06054b50) {
      eocd = at;
      break;
    }
    if (at == 0) break;
  }
  if (eocd == std::string_view::npos) throw ParseError("not a zip archive");
  const std::size_t entries = le16(zip, eocd + 10);
  std::size_t at = le32(zip, eocd + 16);
  for (std::size_t e = 0; e < entries; ++e) {
    if (le32(zip, at) != 0x02014b50) throw ParseError("bad zip central directory");
    const std::uint16_t method = le16(zip, at + 10);
    const std::uint32_t packed = le32(zip, at + 20);
    const std::uint32_t size = le32(zip, at + 24);
    const std::uint16_t name_len = le16(zip, at + 28);
    const std::uint16_t extra_len = le16(zip, at + 30);
    const std::uint16_t comment_len = le16(zip, at + 32);
    const std::uint32_t local = le32(zip, at + 42);
    if (zip.substr(at + 46, name_len) == name) {
      const std::size_t data = local + 30 + le16(zip, local + 26) + le16(zip, local + 28);
      if (data + packed > zip.size()) throw ParseError("truncated zip member");
      const std::string_view body = zip.substr(data, packed);
      if (method == 0) return std::string(body);
      if (method == 8) return inflate_raw(body, size);
      throw ParseError("unsupported zip compression method " + std::to_string(method));
    }
    at += 46 + name_len + extra_len + comment_len;
  }
  throw ParseError("archive has no member " + std::string(name));
}

}  // namespace

std::filesystem::path default_ratings_path(RatingsFormat format, const std::filesystem::path& root) {
  return root / archive_for(format).member;
}

std::filesystem::path fetch_movielens(RatingsFormat format, const std::filesystem::path& dest) {
  const Archive archive = archive_for(format);
  httplib::Client client(kHost);
  client.set_follow_location(true);
  client.set_connection_timeout(20);
  client.set_read_timeout(120);
  auto res = client.Get(archive.path);
  if (!res) {
    throw ParseError(std::string("download of ") + kHost + archive.path + " failed: " +
                     httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw ParseError(std::string("download of ") + kHost + archive.path + " returned HTTP " +
                     std::to_string(res->status));
  }
  const std::string body = extract_member(res->body, archive.member);
  const std::filesystem::path target = default_ratings_path(format, dest);
  std::filesystem::create_directories(target.parent_path());
  std::ofstream out(target, std::ios::binary);
  if (!out) throw ParseError("cannot write " + target.string());
  out << body;
  return target;
}

}  // namespace tropfact::cli
