#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "gofd/error.hpp"
#include "gofd/symbol.hpp"

namespace gofd {

namespace {

constexpr char kMagic[8] = {'G', 'O', 'F', 'D', 'S', 'Y', 'M', '1'};

template <class T>
void put(std::ostream& os, T v) {
  static_assert(std::endian::native == std::endian::little, "cache format assumes a little-endian host");
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  os.write(b, sizeof(T));
}

template <class T>
T get(std::istream& is, const std::filesystem::path& path) {
  T v{};
  char b[sizeof(T)];
  if (!is.read(b, sizeof(T))) fail(ErrorCode::ParseError, "truncated symbol cache " + path.string());
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace

void write_symbol_cache(const std::filesystem::path& path, const SymbolCoefficients& sym) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorCode::IoError, "cannot write " + path.string());
  os.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(sym.dim));
  put<double>(os, sym.s);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(sym.n));
  put<std::uint64_t>(os, static_cast<std::uint64_t>(sym.quadrature_points));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(sym.method));
  for (double v : sym.values) put<double>(os, v);
  if (!os) fail(ErrorCode::IoError, "failed writing " + path.string());
}

SymbolCoefficients read_symbol_cache(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::IoError, "cannot open " + path.string());
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
    fail(ErrorCode::ParseError, "bad symbol cache magic in " + path.string());
  SymbolCoefficients sym;
  sym.dim = static_cast<int>(get<std::uint32_t>(is, path));
  sym.s = get<double>(is, path);
  sym.n = static_cast<int>(get<std::uint32_t>(is, path));
  sym.quadrature_points = static_cast<std::int64_t>(get<std::uint64_t>(is, path));
  auto tag = get<std::uint32_t>(is, path);
  if (sym.dim < 1 || sym.dim > 3 || tag > 3) fail(ErrorCode::ParseError, "bad symbol cache header in " + path.string());
  sym.method = static_cast<SymbolMethod>(tag);
  sym.levels = sym.method == SymbolMethod::richardson ? 2 : 1;
  std::size_t count = 1;
  for (int r = 0; r < sym.dim; ++r) count *= static_cast<std::size_t>(2 * sym.n + 1);
  sym.values.resize(count);
  for (auto& v : sym.values) v = get<double>(is, path);
  if (is.peek() != std::char_traits<char>::eof()) fail(ErrorCode::ParseError, "trailing bytes in " + path.string());
  return sym;
}

std::string symbol_cache_name(const SymbolRequest& r) {
  std::ostringstream os;
  os << "symbol_d" << r.dim << "_s" << std::setprecision(17) << r.s << "_n" << r.n << "_m" << r.m << "_"
     << to_string(r.method);
  if (r.method == SymbolMethod::richardson && r.dim > 1) os << r.levels;
  os << ".bin";
  return os.str();
}

SymbolCoefficients SymbolCache::get(const SymbolRequest& request) {
  auto key = std::make_tuple(request.dim, request.s, static_cast<int>(request.method), request.m, request.levels);
  {
    std::lock_guard lock(mutex_);
    auto it = memory_.find(key);
    if (it != memory_.end() && it->second->n >= request.n) return truncate_symbol(*it->second, request.n);
  }
  std::shared_ptr<const SymbolCoefficients> sym;
  std::filesystem::path file;
  if (!directory_.empty()) {
    file = directory_ / symbol_cache_name(request);
    if (std::filesystem::exists(file)) {
      auto loaded = read_symbol_cache(file);
      if (loaded.dim == request.dim && loaded.s == request.s && loaded.n == request.n)
        sym = std::make_shared<const SymbolCoefficients>(std::move(loaded));
    }
  }
  if (!sym) {
    sym = std::make_shared<const SymbolCoefficients>(compute_symbol(request));
    if (!file.empty()) {
      std::filesystem::create_directories(directory_);
      write_symbol_cache(file, *sym);
    }
  }
  std::lock_guard lock(mutex_);
  auto& slot = memory_[key];
  if (!slot || slot->n < sym->n) slot = sym;
  return *sym;
}

}  // namespace gofd
