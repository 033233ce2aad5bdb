#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace smelab {

// Shortest round-trip-safe rendering with 17 significant digits, '.' decimal, locale-free.
std::string format_double(double value);

using CsvCell = std::variant<double, std::int64_t, std::uint64_t, std::string>;

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    void add_row(std::vector<CsvCell> cells);

    [[nodiscard]] const std::vector<std::string>& header() const { return header_; }
    [[nodiscard]] std::size_t rows() const { return rows_.size(); }
    [[nodiscard]] std::string str() const;

    // Throws IoError if the file cannot be written.
    void write(const std::filesystem::path& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

void write_text_file(const std::filesystem::path& path, std::string_view contents);

// 64-bit FNV-1a of a byte string, as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace smelab
