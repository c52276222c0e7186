#include "ledgerlens/csv.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

namespace ledgerlens {

namespace {

constexpr std::string_view kReserved = "%;@=!,\"\r\n";

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

}  // namespace

std::string encode_token(std::string_view raw) {
  if (raw.empty()) return "%00";
  std::string out;
  out.reserve(raw.size());
  static const char* digits = "0123456789ABCDEF";
  for (char c : raw) {
    if (kReserved.find(c) != std::string_view::npos) {
      out.push_back('%');
      out.push_back(digits[(static_cast<unsigned char>(c) >> 4) & 0xF]);
      out.push_back(digits[static_cast<unsigned char>(c) & 0xF]);
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string decode_token(std::string_view encoded) {
  if (encoded == "%00") return "";
  std::string out;
  out.reserve(encoded.size());
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    if (encoded[i] == '%') {
      if (i + 2 >= encoded.size() || hex_value(encoded[i + 1]) < 0 ||
          hex_value(encoded[i + 2]) < 0)
        throw Error("bad percent escape in token: " + std::string(encoded));
      out.push_back(static_cast<char>(hex_value(encoded[i + 1]) * 16 + hex_value(encoded[i + 2])));
      i += 2;
    } else {
      out.push_back(encoded[i]);
    }
  }
  return out;
}

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string read_cell(std::string_view s) { return decode_token(s); }

std::string format_read(const ReadAccess& r) {
  return encode_token(r.key) + "@" + std::to_string(r.version);
}

ReadAccess parse_read(std::string_view token, std::size_t line_no) {
  const auto at = token.rfind('@');
  if (at == std::string_view::npos)
    throw Error("line " + std::to_string(line_no) + ": read token without version: " +
                std::string(token));
  ReadAccess r;
  r.key = decode_token(token.substr(0, at));
  const auto ver = token.substr(at + 1);
  auto [p, ec] = std::from_chars(ver.data(), ver.data() + ver.size(), r.version);
  if (ec != std::errc() || p != ver.data() + ver.size())
    throw Error("line " + std::to_string(line_no) + ": bad read version: " + std::string(token));
  return r;
}

std::string format_double_exact(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

}  // namespace

void write_canonical_csv(const BlockchainLog& log, std::ostream& out) {
  out << "# " << kCanonicalCsvSchema << "\n";
  if (log.config) {
    out << "# config block_count=" << log.config->block_count
        << " block_timeout_s=" << format_double_exact(log.config->block_timeout_s)
        << " policy=" << log.config->policy_text << "\n";
  }
  for (const auto& b : log.blocks)
    out << "# block " << b.block_number << " cut=" << to_string(b.cut_reason) << "\n";
  out << kCanonicalCsvHeader << "\n";
  for (const auto& tx : log.transactions) {
    out << tx.client_timestamp_ms << ',' << encode_token(tx.activity_name) << ',';
    for (std::size_t i = 0; i < tx.function_arguments.size(); ++i)
      out << (i ? ";" : "") << encode_token(tx.function_arguments[i]);
    out << ',';
    for (std::size_t i = 0; i < tx.endorsers.size(); ++i)
      out << (i ? ";" : "") << encode_token(tx.endorsers[i]);
    out << ',' << encode_token(tx.invoker_client) << ',' << encode_token(tx.invoker_org) << ',';
    for (std::size_t i = 0; i < tx.read_set.size(); ++i)
      out << (i ? ";" : "") << format_read(tx.read_set[i]);
    out << ',';
    for (std::size_t i = 0; i < tx.write_set.size(); ++i)
      out << (i ? ";" : "") << encode_token(tx.write_set[i].key) << '='
          << encode_token(tx.write_set[i].value);
    out << ',';
    for (std::size_t i = 0; i < tx.range_reads.size(); ++i) {
      const auto& rr = tx.range_reads[i];
      out << (i ? ";" : "") << encode_token(rr.start_key) << '@' << encode_token(rr.end_key);
      for (const auto& o : rr.observed) out << '!' << format_read(o);
    }
    out << ',' << to_string(tx.status) << ',' << to_string(tx.tx_type) << ','
        << tx.commit_order << ',' << tx.block_number << "\n";
  }
}

std::string write_canonical_csv(const BlockchainLog& log) {
  std::ostringstream os;
  write_canonical_csv(log, os);
  return os.str();
}

namespace {

std::uint64_t parse_u64(std::string_view s, std::size_t line_no, const char* what) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw Error("line " + std::to_string(line_no) + ": bad " + what + ": " + std::string(s));
  return v;
}

std::int64_t parse_i64(std::string_view s, std::size_t line_no, const char* what) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw Error("line " + std::to_string(line_no) + ": bad " + what + ": " + std::string(s));
  return v;
}

void parse_preamble_line(std::string_view line, std::size_t line_no, BlockchainLog& log) {
  // "# config ..." and "# block N cut=R"; the version stamp and anything
  // else is informational.
  std::istringstream in{std::string(line.substr(1))};
  std::string word;
  in >> word;
  if (word == "config") {
    NetworkConfig cfg;
    std::string field;
    while (in >> field) {
      const auto eq = field.find('=');
      if (eq == std::string::npos)
        throw Error("line " + std::to_string(line_no) + ": bad config field: " + field);
      const std::string key = field.substr(0, eq);
      const std::string value = field.substr(eq + 1);
      if (key == "block_count") cfg.block_count = static_cast<int>(parse_i64(value, line_no, "block_count"));
      else if (key == "block_timeout_s") cfg.block_timeout_s = std::stod(value);
      else if (key == "policy") cfg.policy_text = value;
      else throw Error("line " + std::to_string(line_no) + ": unknown config field: " + key);
    }
    log.config = cfg;
  } else if (word == "block") {
    std::string num, cut;
    in >> num >> cut;
    Block b;
    b.block_number = parse_u64(num, line_no, "block number");
    if (!cut.starts_with("cut="))
      throw Error("line " + std::to_string(line_no) + ": block line without cut reason");
    b.cut_reason = cut_reason_from_string(cut.substr(4));
    log.blocks.push_back(b);
  }
}

}  // namespace

BlockchainLog read_canonical_csv(std::istream& in) {
  BlockchainLog log;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (header_seen)
        throw Error("line " + std::to_string(line_no) + ": comment after header");
      parse_preamble_line(line, line_no, log);
      continue;
    }
    if (!header_seen) {
      if (line != kCanonicalCsvHeader)
        throw Error("line " + std::to_string(line_no) + ": unexpected header row");
      header_seen = true;
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() != 13)
      throw Error("line " + std::to_string(line_no) + ": expected 13 columns, got " +
                  std::to_string(cells.size()));
    TransactionRecord tx;
    tx.client_timestamp_ms = parse_i64(cells[0], line_no, "client_ts_ms");
    tx.activity_name = read_cell(cells[1]);
    if (!cells[2].empty())
      for (auto tok : split(cells[2], ';')) tx.function_arguments.push_back(decode_token(tok));
    if (!cells[3].empty())
      for (auto tok : split(cells[3], ';')) tx.endorsers.push_back(decode_token(tok));
    tx.invoker_client = read_cell(cells[4]);
    tx.invoker_org = read_cell(cells[5]);
    if (!cells[6].empty())
      for (auto tok : split(cells[6], ';')) tx.read_set.push_back(parse_read(tok, line_no));
    if (!cells[7].empty()) {
      for (auto tok : split(cells[7], ';')) {
        const auto eq = tok.find('=');
        if (eq == std::string_view::npos)
          throw Error("line " + std::to_string(line_no) + ": write token without value");
        tx.write_set.push_back(
            {decode_token(tok.substr(0, eq)), decode_token(tok.substr(eq + 1))});
      }
    }
    if (!cells[8].empty()) {
      for (auto tok : split(cells[8], ';')) {
        const auto parts = split(tok, '!');
        const auto at = parts[0].find('@');
        if (at == std::string_view::npos)
          throw Error("line " + std::to_string(line_no) + ": range token without end key");
        RangeRead rr;
        rr.start_key = decode_token(parts[0].substr(0, at));
        rr.end_key = decode_token(parts[0].substr(at + 1));
        for (std::size_t i = 1; i < parts.size(); ++i)
          rr.observed.push_back(parse_read(parts[i], line_no));
        tx.range_reads.push_back(std::move(rr));
      }
    }
    tx.status = tx_status_from_string(cells[9]);
    tx.tx_type = tx_type_from_string(cells[10]);
    tx.commit_order = parse_u64(cells[11], line_no, "commit_order");
    tx.block_number = parse_u64(cells[12], line_no, "block_number");
    log.transactions.push_back(std::move(tx));
  }
  if (!header_seen) throw Error("canonical CSV: missing header row");

  if (log.blocks.empty()) {
    // No preamble block table: rebuild one from the block_number column.
    for (const auto& tx : log.transactions) {
      if (log.blocks.empty() || log.blocks.back().block_number != tx.block_number) {
        Block b;
        b.block_number = tx.block_number;
        log.blocks.push_back(b);
      }
      log.blocks.back().tx_commit_orders.push_back(tx.commit_order);
    }
  } else {
    // Preamble listed the blocks; attach member transactions in file order.
    std::map<std::uint64_t, Block*> by_number;
    for (auto& b : log.blocks) by_number[b.block_number] = &b;
    for (const auto& tx : log.transactions) {
      auto it = by_number.find(tx.block_number);
      if (it == by_number.end())
        throw Error("transaction " + std::to_string(tx.commit_order) +
                    " references block " + std::to_string(tx.block_number) +
                    " missing from the block table");
      it->second->tx_commit_orders.push_back(tx.commit_order);
    }
  }
  return log;
}

BlockchainLog read_canonical_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_canonical_csv(in);
}

BlockchainLog load_canonical_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_canonical_csv(in);
}

void save_canonical_csv(const BlockchainLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  write_canonical_csv(log, out);
}

}  // namespace ledgerlens
