// Canonical blockchain-log CSV format.
//
// Layout: optional `#`-prefixed preamble (format version, network config
// echo, block table), then the fixed header row
//   client_ts_ms,activity,args,endorsers,invoker_client,invoker_org,
//   read_set,write_set,range_reads,status,tx_type,commit_order,block_number
// and one row per transaction. List-valued cells are `;`-separated tokens:
// `key@version` for reads, `key=value` for writes, and
// `start@end!key@version!...` per range read. Reserved characters inside
// tokens are percent-encoded, so cells never need quoting; the empty string
// is encoded as `%00`. UTF-8, `\n` line endings.
#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "ledgerlens/model.hpp"

namespace ledgerlens {

inline constexpr std::string_view kCanonicalCsvSchema = "ledgerlens-log v1";
inline constexpr std::string_view kCanonicalCsvHeader =
    "client_ts_ms,activity,args,endorsers,invoker_client,invoker_org,"
    "read_set,write_set,range_reads,status,tx_type,commit_order,block_number";

std::string encode_token(std::string_view raw);
std::string decode_token(std::string_view encoded);

void write_canonical_csv(const BlockchainLog& log, std::ostream& out);
std::string write_canonical_csv(const BlockchainLog& log);

// Accepts logs without a preamble: the config stays unset and the block
// table is reconstructed from the block_number column. Throws Error with a
// line number on malformed input.
BlockchainLog read_canonical_csv(std::istream& in);
BlockchainLog read_canonical_csv(std::string_view text);

BlockchainLog load_canonical_csv(const std::string& path);
void save_canonical_csv(const BlockchainLog& log, const std::string& path);

}  // namespace ledgerlens
