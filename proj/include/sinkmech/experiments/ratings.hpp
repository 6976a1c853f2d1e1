#pragma once

// Rating matrices from MovieLens and Jester files, plus empirical-histogram
// imputation of missing entries.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "sinkmech/errors.hpp"
#include "sinkmech/parallel.hpp"

namespace sinkmech::experiments {

struct ItemInfo {
  std::string id;
  std::string title;
  std::vector<std::string> genres;
};

/// Dense users x items matrix; NaN marks a missing rating.
class RatingMatrix {
 public:
  RatingMatrix() = default;
  RatingMatrix(std::vector<std::string> users, std::vector<ItemInfo> items, double lo, double hi)
      : users_(std::move(users)),
        items_(std::move(items)),
        lo_(lo),
        hi_(hi),
        values_(users_.size() * items_.size(), std::numeric_limits<double>::quiet_NaN()) {
    if (!(lo < hi)) throw ArgumentError("rating scale needs lo < hi");
  }

  std::size_t user_count() const noexcept { return users_.size(); }
  std::size_t item_count() const noexcept { return items_.size(); }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  const std::vector<std::string>& users() const noexcept { return users_; }
  const std::vector<ItemInfo>& items() const noexcept { return items_; }

  std::optional<double> at(std::size_t user, std::size_t item) const {
    const double v = values_.at(user * items_.size() + item);
    if (std::isnan(v)) return std::nullopt;
    return v;
  }

  void set(std::size_t user, std::size_t item, double rating) {
    if (rating < lo_ || rating > hi_) throw ArgumentError("rating outside the matrix scale");
    values_.at(user * items_.size() + item) = rating;
  }

  std::size_t present_count(std::size_t item) const {
    std::size_t count = 0;
    for (std::size_t u = 0; u < users_.size(); ++u) count += at(u, item).has_value();
    return count;
  }

  bool complete() const {
    for (double v : values_) {
      if (std::isnan(v)) return false;
    }
    return true;
  }

 private:
  std::vector<std::string> users_;
  std::vector<ItemInfo> items_;
  double lo_ = 0;
  double hi_ = 1;
  std::vector<double> values_;
};

/// Refuses matrices with more cells than this unless the caller raises it.
inline constexpr std::uint64_t kDefaultMatrixBudget = 200'000'000;

namespace detail {

/// One CSV record with double-quote escaping; no embedded newlines.
inline std::vector<std::string> split_csv(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", line_no);
  return fields;
}

inline double parse_double(const std::string& token, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size() || !std::isfinite(v)) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad number '" + token + "'", line_no);
  }
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open " + path);
  return in;
}

inline void check_budget(std::uint64_t users, std::uint64_t items, std::uint64_t budget) {
  if (items != 0 && users > budget / items) {
    throw ResourceError("rating matrix would have " + std::to_string(users * items) + " cells, budget is " +
                        std::to_string(budget) + "; use a genre filter or a smaller dataset");
  }
}

}  // namespace detail

/// MovieLens CSV layout: ratings.csv (userId,movieId,rating,timestamp) and
/// movies.csv (movieId,title,genres) with '|'-separated genres, both with a
/// header row. Scale 0.5 to 5. With a genre filter only that genre's movies
/// and the users who rated at least one of them are kept.
inline RatingMatrix load_movielens(std::istream& ratings, std::istream& movies,
                                   const std::optional<std::string>& genre = std::nullopt,
                                   std::uint64_t budget = kDefaultMatrixBudget) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<ItemInfo> items;
  std::unordered_map<std::string, std::size_t> item_index;
  std::set<std::string> known;
  std::set<std::string> all_genres;
  if (!std::getline(movies, line)) throw ParseError("movies file is empty", 0);
  line_no = 1;
  while (std::getline(movies, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = detail::split_csv(line, line_no);
    if (fields.size() != 3) throw ParseError("movies rows are 'movieId,title,genres'", line_no);
    ItemInfo info{fields[0], fields[1], {}};
    std::size_t start = 0;
    const std::string& g = fields[2];
    while (start <= g.size()) {
      const auto bar = g.find('|', start);
      const auto token = g.substr(start, bar == std::string::npos ? std::string::npos : bar - start);
      if (!token.empty()) {
        info.genres.push_back(token);
        all_genres.insert(token);
      }
      if (bar == std::string::npos) break;
      start = bar + 1;
    }
    if (!known.insert(info.id).second) throw ParseError("duplicate movieId " + info.id, line_no);
    bool keep = !genre;
    for (const auto& t : info.genres) keep = keep || t == *genre;
    if (keep) {
      item_index.emplace(info.id, items.size());
      items.push_back(std::move(info));
    }
  }
  if (genre && !all_genres.count(*genre)) throw ArgumentError("unknown genre '" + *genre + "'");

  struct Entry {
    std::size_t user, item;
    double rating;
  };
  std::vector<std::string> users;
  std::unordered_map<std::string, std::size_t> user_index;
  std::vector<Entry> entries;
  if (!std::getline(ratings, line)) throw ParseError("ratings file is empty", 0);
  line_no = 1;
  while (std::getline(ratings, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = detail::split_csv(line, line_no);
    if (fields.size() != 4) throw ParseError("ratings rows are 'userId,movieId,rating,timestamp'", line_no);
    const double rating = detail::parse_double(fields[2], line_no);
    if (rating < 0.5 || rating > 5.0) throw ParseError("rating " + fields[2] + " outside [0.5, 5]", line_no);
    if (!known.count(fields[1])) throw ParseError("unknown movieId " + fields[1], line_no);
    const auto it = item_index.find(fields[1]);
    if (it == item_index.end()) continue;
    auto [u, inserted] = user_index.emplace(fields[0], users.size());
    if (inserted) users.push_back(fields[0]);
    entries.push_back({u->second, it->second, rating});
  }
  detail::check_budget(users.size(), items.size(), budget);
  RatingMatrix matrix(std::move(users), std::move(items), 0.5, 5.0);
  for (const auto& e : entries) matrix.set(e.user, e.item, e.rating);
  return matrix;
}

inline RatingMatrix load_movielens(const std::string& ratings_path, const std::string& movies_path,
                                   const std::optional<std::string>& genre = std::nullopt,
                                   std::uint64_t budget = kDefaultMatrixBudget) {
  auto ratings = detail::open_input(ratings_path);
  auto movies = detail::open_input(movies_path);
  return load_movielens(ratings, movies, genre, budget);
}

/// Jester layout: one user per line, first field the user's rating count,
/// then one rating per joke in [-10, 10] with 99 meaning missing. Fields are
/// separated by commas or whitespace.
inline RatingMatrix load_jester(std::istream& in, std::uint64_t budget = kDefaultMatrixBudget) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    for (char& c : line) {
      if (c == ',' || c == '\t' || c == '\r') c = ' ';
    }
    std::vector<std::string> tokens;
    std::size_t pos = 0;
    while ((pos = line.find_first_not_of(' ', pos)) != std::string::npos) {
      const auto end = line.find(' ', pos);
      tokens.push_back(line.substr(pos, end == std::string::npos ? std::string::npos : end - pos));
      pos = end;
    }
    if (tokens.empty()) continue;
    if (tokens.size() < 2) throw ParseError("jester rows need a count and at least one rating", line_no);
    if (width == 0) width = tokens.size() - 1;
    if (tokens.size() - 1 != width) {
      throw ParseError("expected " + std::to_string(width) + " ratings, found " + std::to_string(tokens.size() - 1),
                       line_no);
    }
    detail::parse_double(tokens[0], line_no);
    std::vector<double> row;
    row.reserve(width);
    for (std::size_t j = 1; j < tokens.size(); ++j) {
      const double v = detail::parse_double(tokens[j], line_no);
      if (v == 99.0) {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
      } else if (v < -10.0 || v > 10.0) {
        throw ParseError("rating " + tokens[j] + " outside [-10, 10]", line_no);
      } else {
        row.push_back(v);
      }
    }
    rows.push_back(std::move(row));
  }
  detail::check_budget(rows.size(), width, budget);
  std::vector<std::string> users;
  for (std::size_t u = 0; u < rows.size(); ++u) users.push_back(std::to_string(u + 1));
  std::vector<ItemInfo> items;
  for (std::size_t j = 0; j < width; ++j) items.push_back({std::to_string(j + 1), "", {}});
  RatingMatrix matrix(std::move(users), std::move(items), -10.0, 10.0);
  for (std::size_t u = 0; u < rows.size(); ++u) {
    for (std::size_t j = 0; j < width; ++j) {
      if (!std::isnan(rows[u][j])) matrix.set(u, j, rows[u][j]);
    }
  }
  return matrix;
}

inline RatingMatrix load_jester(const std::string& path, std::uint64_t budget = kDefaultMatrixBudget) {
  auto in = detail::open_input(path);
  return load_jester(in, budget);
}

/// Drops items with fewer than `min_ratings` present entries, then fills
/// each missing entry with an independent draw from that item's present
/// ratings. Draws for item j use a generator seeded by (seed, j), so the
/// result does not depend on `workers`.
inline RatingMatrix impute(const RatingMatrix& matrix, std::size_t min_ratings = 10, std::uint64_t seed = 0,
                           std::size_t workers = 1) {
  std::vector<std::size_t> kept;
  for (std::size_t j = 0; j < matrix.item_count(); ++j) {
    if (matrix.present_count(j) >= min_ratings) kept.push_back(j);
  }
  if (kept.empty()) {
    throw DataError("no item has at least " + std::to_string(min_ratings) + " ratings");
  }
  std::vector<ItemInfo> items;
  for (std::size_t j : kept) items.push_back(matrix.items()[j]);
  RatingMatrix out(matrix.users(), std::move(items), matrix.lo(), matrix.hi());
  const std::size_t users = matrix.user_count();
  std::vector<std::vector<double>> columns(kept.size());
  parallel_chunks(kept.size(), workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      const std::size_t j = kept[c];
      std::vector<double> present;
      for (std::size_t u = 0; u < users; ++u) {
        if (auto v = matrix.at(u, j)) present.push_back(*v);
      }
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(j >> 32)};
      std::mt19937_64 rng(seq);
      std::uniform_int_distribution<std::size_t> pick(0, present.size() - 1);
      auto& column = columns[c];
      column.resize(users);
      for (std::size_t u = 0; u < users; ++u) {
        const auto v = matrix.at(u, j);
        column[u] = v ? *v : present[pick(rng)];
      }
    }
  });
  for (std::size_t c = 0; c < kept.size(); ++c) {
    for (std::size_t u = 0; u < users; ++u) out.set(u, c, columns[c][u]);
  }
  return out;
}

}  // namespace sinkmech::experiments
