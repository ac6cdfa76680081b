#ifndef VIEWCAST_CSV_HPP
#define VIEWCAST_CSV_HPP

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace viewcast {

/// Shortest decimal representation that round-trips the exact double.
std::string format_double(double v);

/// Strict, locale-free float parse of the whole string ("nan"/"inf" accepted).
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

/// Quote a field per RFC 4180 when it contains a comma, quote, or newline.
std::string csv_escape(const std::string& field);

std::string csv_join(const std::vector<std::string>& fields);

/// Minimal RFC 4180 reader: quoted fields, CRLF or LF line ends.
class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    /// Reads the next record into `fields`. Returns false at end of input.
    bool next(std::vector<std::string>& fields);

    /// 1-based line number of the record last returned.
    std::size_t record_number() const { return record_; }

private:
    std::istream& in_;
    std::size_t record_ = 0;
};

}  // namespace viewcast

#endif
