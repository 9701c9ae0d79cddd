#include "kchem/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "kchem/error.hpp"

namespace kchem {

std::string format_double(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(std::filesystem::path const& path, bool binary = false)
{
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
  return out;
}

template<class T>
void put(std::ostream& os, T v)
{
  os.write(reinterpret_cast<char const*>(&v), sizeof v);
}

template<class T>
T get(std::istream& is)
{
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is)
    throw std::runtime_error("truncated field snapshot");
  return v;
}

constexpr char kMagic[8] = {'K', 'C', 'H', 'E', 'M', 'F', '0', '1'};

}  // namespace

void write_csv(std::filesystem::path const& path, std::string const& hash,
               std::vector<std::string> const& columns, std::vector<std::vector<double>> const& rows,
               std::vector<std::string> const& comments)
{
  auto out = open_out(path);
  out << "# config_hash=" << hash << '\n';
  for (auto const& c : comments)
    out << "# " << c << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i)
    out << (i ? "," : "") << columns[i];
  out << '\n';
  for (auto const& r : rows)
  {
    for (std::size_t i = 0; i < r.size(); ++i)
      out << (i ? "," : "") << format_double(r[i]);
    out << '\n';
  }
}

std::size_t CsvTable::column(std::string const& name) const
{
  for (std::size_t i = 0; i < columns.size(); ++i)
  {
    if (columns[i] == name)
      return i;
  }
  throw ArgumentError("no column '" + name + "'");
}

CsvTable read_csv(std::filesystem::path const& path)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot read " + path.string());
  CsvTable t;
  std::string line;
  bool header = false;
  while (std::getline(in, line))
  {
    if (line.empty())
      continue;
    if (line[0] == '#')
    {
      std::string body = line.substr(line.size() > 1 && line[1] == ' ' ? 2 : 1);
      if (body.rfind("config_hash=", 0) == 0)
        t.hash = body.substr(12);
      else
        t.comments.push_back(body);
      continue;
    }
    std::istringstream ss(line);
    std::string cell;
    if (!header)
    {
      while (std::getline(ss, cell, ','))
        t.columns.push_back(cell);
      header = true;
      continue;
    }
    std::vector<double> row;
    while (std::getline(ss, cell, ','))
    {
      char* end = nullptr;
      double const v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str())
        throw std::runtime_error("non-numeric cell '" + cell + "' in " + path.string());
      row.push_back(v);
    }
    if (row.size() != t.columns.size())
      throw std::runtime_error("ragged row in " + path.string());
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_ledger_csv(std::filesystem::path const& path, std::string const& hash,
                      BoundLedger const& ledger)
{
  auto out = open_out(path);
  out << "# config_hash=" << hash << '\n';
  for (auto const& h : ledger.header)
    out << "# " << h << '\n';
  out << "t,inequality,measured,bound,margin,violated\n";
  for (auto const& r : ledger.rows)
  {
    out << format_double(r.t) << ',' << r.inequality << ',' << format_double(r.measured) << ','
        << format_double(r.bound) << ',' << format_double(r.margin) << ',' << (r.violated ? 1 : 0)
        << '\n';
  }
}

void write_signal_csv(std::filesystem::path const& path, std::string const& hash,
                      SignalField const& s)
{
  std::vector<std::string> cols{"x"};
  std::size_t const m = s.components();
  for (std::size_t c = 0; c < m; ++c)
    cols.push_back("S" + std::to_string(c));
  for (std::size_t c = 0; c < m; ++c)
    cols.push_back("dxS" + std::to_string(c));
  for (std::size_t c = 0; c < m; ++c)
    cols.push_back("dtS" + std::to_string(c));
  std::vector<std::vector<double>> rows(s.grid.cells);
  for (std::size_t i = 0; i < s.grid.cells; ++i)
  {
    auto& r = rows[i];
    r.push_back(s.grid.center(i));
    for (std::size_t c = 0; c < m; ++c)
      r.push_back(s.value[c][i]);
    for (std::size_t c = 0; c < m; ++c)
      r.push_back(s.dx[c][i]);
    for (std::size_t c = 0; c < m; ++c)
      r.push_back(s.dt[c][i]);
  }
  write_csv(path, hash, cols, rows, {"t=" + format_double(s.t)});
}

void write_field_binary(std::filesystem::path const& path, std::string const& hash,
                        PhaseSpaceField const& f)
{
  auto out = open_out(path, true);
  auto const& g = f.grid;
  out.write(kMagic, sizeof kMagic);
  std::uint32_t const hash_len = static_cast<std::uint32_t>(hash.size());
  put(out, hash_len);
  out.write(hash.data(), hash_len);
  put(out, f.t);
  put(out, static_cast<std::uint64_t>(g.x.cells));
  put(out, g.x.length);
  put(out, static_cast<std::uint64_t>(g.v.size()));
  for (std::size_t i = 0; i < g.v.size(); ++i)
  {
    put(out, g.v.speeds[i]);
    put(out, g.v.weights[i]);
  }
  for (auto const* y : {&g.y1, &g.y2})
  {
    put(out, static_cast<std::uint64_t>(y->cells));
    put(out, y->lower);
    put(out, y->spacing);
  }
  out.write(reinterpret_cast<char const*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
}

PhaseSpaceField read_field_binary(std::filesystem::path const& path, std::string* hash)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot read " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw std::runtime_error("not a field snapshot: " + path.string());
  auto const hash_len = get<std::uint32_t>(in);
  std::string h(hash_len, '\0');
  in.read(h.data(), hash_len);
  if (hash != nullptr)
    *hash = h;
  double const t = get<double>(in);
  PhaseSpaceGrid g;
  g.x.cells = get<std::uint64_t>(in);
  g.x.length = get<double>(in);
  auto const nv = get<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < nv; ++i)
  {
    g.v.speeds.push_back(get<double>(in));
    g.v.weights.push_back(get<double>(in));
  }
  for (auto* y : {&g.y1, &g.y2})
  {
    y->cells = get<std::uint64_t>(in);
    y->lower = get<double>(in);
    y->spacing = get<double>(in);
  }
  PhaseSpaceField f(g);
  f.t = t;
  in.read(reinterpret_cast<char*>(f.values.data()),
          static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!in)
    throw std::runtime_error("truncated field snapshot " + path.string());
  return f;
}

}  // namespace kchem
