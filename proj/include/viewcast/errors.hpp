#ifndef VIEWCAST_ERRORS_HPP
#define VIEWCAST_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace viewcast {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A required CSV column is absent or out of place.
class MissingColumnError : public Error {
public:
    MissingColumnError(std::string column, const std::string& detail)
        : Error("missing column '" + column + "': " + detail), column_(std::move(column)) {}
    const std::string& column() const { return column_; }

private:
    std::string column_;
};

/// A CSV cell failed to parse or violates a field constraint.
class BadCellError : public Error {
public:
    BadCellError(std::size_t row, std::string column, const std::string& reason)
        : Error("row " + std::to_string(row) + ", column '" + column + "': " + reason),
          row_(row),
          column_(std::move(column)) {}
    std::size_t row() const { return row_; }
    const std::string& column() const { return column_; }

private:
    std::size_t row_;
    std::string column_;
};

/// Two rows share the same (show_id, season, episode) key.
class DuplicateEpisodeError : public Error {
public:
    DuplicateEpisodeError(const std::string& show_id, int season, int episode)
        : Error("duplicate episode key (" + show_id + ", S" + std::to_string(season) + "E" +
                std::to_string(episode) + ")") {}
};

class UnknownShowError : public Error {
public:
    explicit UnknownShowError(const std::string& show_id)
        : Error("unknown show '" + show_id + "'") {}
};

class TooFewEpisodesError : public Error {
public:
    TooFewEpisodesError(const std::string& show_id, std::size_t have, std::size_t need)
        : Error("show '" + show_id + "' has " + std::to_string(have) + " episodes, needs >= " +
                std::to_string(need)) {}
};

class EmptyFrameError : public Error {
public:
    EmptyFrameError() : Error("feature frame has no rows") {}
};

class EmptyColumnError : public Error {
public:
    explicit EmptyColumnError(const std::string& what) : Error(what) {}
};

class MissingFeatureError : public Error {
public:
    explicit MissingFeatureError(const std::string& column)
        : Error("row does not provide bound feature '" + column + "'") {}
};

class TooManyFeaturesError : public Error {
public:
    explicit TooManyFeaturesError(std::size_t count)
        : Error("tree uses " + std::to_string(count) +
                " distinct features, exact enumeration capped at 15") {}
};

class InvalidSpecError : public Error {
public:
    explicit InvalidSpecError(const std::string& what) : Error(what) {}
};

}  // namespace viewcast

#endif
