#include "flatlog/io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <unordered_map>

#include "flatlog/error.hpp"
#include "flatlog/runtime.hpp"

namespace flatlog {

namespace fs = std::filesystem;

namespace {

constexpr std::array<char, 8> kMagic = {'F', 'L', 'O', 'G', 'S', 'N', 'P', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

std::uint32_t get_u32(std::istream& in, const fs::path& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw IoError("truncated snapshot: " + path.string());
  return std::uint32_t{b[0]} | std::uint32_t{b[1]} << 8 | std::uint32_t{b[2]} << 16 | std::uint32_t{b[3]} << 24;
}

std::uint64_t get_u64(std::istream& in, const fs::path& path) {
  std::uint64_t lo = get_u32(in, path);
  return lo | std::uint64_t{get_u32(in, path)} << 32;
}

}  // namespace

TextRows read_tsv(const fs::path& path, std::size_t arity) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  TextRows rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> row;
    std::size_t start = 0;
    while (true) {
      std::size_t tab = line.find('\t', start);
      row.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (row.size() != arity) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(arity) +
                    " columns, found " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (in.bad()) throw IoError("read error on " + path.string());
  return rows;
}

void write_tsv(const fs::path& path, const TextRows& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << '\t';
      out << row[i];
    }
    out << '\n';
  }
  if (!out) throw IoError("write error on " + path.string());
}

void write_snapshot(const fs::path& path, const SortedColumns& rows, const Interner& interner) {
  // Renumber to file-local ids in first-seen (row-major) order.
  std::unordered_map<Value, std::uint32_t> local;
  std::vector<Value> dict;
  auto id_of = [&](Value v) {
    auto [it, fresh] = local.emplace(v, static_cast<std::uint32_t>(dict.size()));
    if (fresh) dict.push_back(v);
    return it->second;
  };
  std::vector<std::vector<std::uint32_t>> cols(rows.arity(), std::vector<std::uint32_t>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows.arity(); ++c) cols[c][r] = id_of(rows.at(r, c));
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, static_cast<std::uint32_t>(rows.arity()));
  put_u64(out, rows.size());
  for (const auto& col : cols) {
    for (std::uint32_t v : col) put_u32(out, v);
  }
  put_u32(out, static_cast<std::uint32_t>(dict.size()));
  for (Value v : dict) {
    const std::string& s = interner.name(v);
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  if (!out) throw IoError("write error on " + path.string());
}

TextRows read_snapshot(const fs::path& path, std::size_t arity) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw IoError("not a snapshot file: " + path.string());
  const std::uint32_t file_arity = get_u32(in, path);
  if (file_arity != arity) {
    throw IoError(path.string() + ": snapshot arity " + std::to_string(file_arity) + ", expected " +
                  std::to_string(arity));
  }
  const std::uint64_t n = get_u64(in, path);
  // Header is 20 bytes; refuse counts the file cannot hold before allocating.
  const std::uint64_t size = fs::file_size(path);
  if (arity != 0 && n > (size - std::min<std::uint64_t>(size, 20)) / (4ull * arity)) {
    throw IoError("truncated snapshot: " + path.string());
  }
  std::vector<std::vector<std::uint32_t>> cols(arity, std::vector<std::uint32_t>(n));
  for (auto& col : cols) {
    for (auto& v : col) v = get_u32(in, path);
  }
  const std::uint32_t count = get_u32(in, path);
  if (count > size / 4) throw IoError("truncated snapshot: " + path.string());
  std::vector<std::string> dict(count);
  for (auto& s : dict) {
    const std::uint32_t len = get_u32(in, path);
    if (len > size) throw IoError("truncated snapshot: " + path.string());
    s.resize(len);
    if (!in.read(s.data(), static_cast<std::streamsize>(s.size()))) throw IoError("truncated snapshot: " + path.string());
  }
  if (in.peek() != std::char_traits<char>::eof()) throw IoError("trailing bytes in snapshot: " + path.string());
  TextRows rows(n, std::vector<std::string>(arity));
  for (std::size_t c = 0; c < arity; ++c) {
    for (std::uint64_t r = 0; r < n; ++r) {
      if (cols[c][r] >= dict.size()) throw IoError("snapshot id out of range in " + path.string());
      rows[r][c] = dict[cols[c][r]];
    }
  }
  return rows;
}

std::size_t load_inputs(Engine& engine, const fs::path& dir, const LoadOptions& options) {
  std::size_t loaded = 0;
  for (const auto& decl : engine.program().relations) {
    if (!decl.input) continue;
    const fs::path snap = dir / (decl.name + ".snap");
    const fs::path tsv = dir / (decl.name + ".tsv");
    TextRows rows;
    if (options.prefer_binary && fs::exists(snap)) {
      rows = read_snapshot(snap, decl.arity());
    } else if (fs::exists(tsv)) {
      rows = read_tsv(tsv, decl.arity());
    } else if (options.strict) {
      throw IoError("missing input file " + tsv.string());
    } else {
      if (options.warn) options.warn("no input file for " + decl.name + " (" + tsv.string() + "), treating it as empty");
      continue;
    }
    loaded += rows.size();
    engine.add_facts(decl.name, rows);
  }
  return loaded;
}

std::vector<fs::path> write_outputs(const Engine& engine, const fs::path& dir, bool binary) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<fs::path> written;
  for (const auto& decl : engine.program().relations) {
    if (!decl.output) continue;
    written.push_back(dir / (decl.name + ".tsv"));
    write_tsv(written.back(), engine.rows(decl.name));
    if (binary) {
      written.push_back(dir / (decl.name + ".snap"));
      write_snapshot(written.back(), engine.store().contents(decl.name), engine.interner());
    }
  }
  return written;
}

}  // namespace flatlog
