#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "flatlog/columns.hpp"
#include "flatlog/value.hpp"

namespace flatlog {

class Engine;

using TextRows = std::vector<std::vector<std::string>>;

// Tab-separated rows, one tuple per line. Empty lines are skipped; a row
// with the wrong number of columns is an IoError naming the line.
TextRows read_tsv(const std::filesystem::path& path, std::size_t arity);
void write_tsv(const std::filesystem::path& path, const TextRows& rows);

// Binary columnar snapshot of one relation (layout in docs/snapshot_format.md).
// Ids inside the file are local to it; the dictionary maps them back to text.
void write_snapshot(const std::filesystem::path& path, const SortedColumns& rows, const Interner& interner);
TextRows read_snapshot(const std::filesystem::path& path, std::size_t arity);

struct LoadOptions {
  bool strict = false;         // a missing input file is an error, not a warning
  bool prefer_binary = false;  // read <Name>.snap when present
  std::function<void(const std::string&)> warn;
};

// Loads every .input relation of the engine's program from `dir`.
// Returns the number of tuples read.
std::size_t load_inputs(Engine& engine, const std::filesystem::path& dir, const LoadOptions& options);

// Writes every .output relation as sorted <Name>.tsv (and <Name>.snap when
// `binary`). Returns the files written.
std::vector<std::filesystem::path> write_outputs(const Engine& engine, const std::filesystem::path& dir, bool binary);

}  // namespace flatlog
