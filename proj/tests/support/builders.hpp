// Small helpers for constructing logs in tests.
#pragma once

#include <string>
#include <vector>

#include "ledgerlens/model.hpp"

namespace ledgerlens::testing {

class LogBuilder {
 public:
  // Appends a transaction; commit_order and block assignment are implicit
  // (block size fixed via blocks_of, default one big block).
  LogBuilder& blocks_of(std::size_t n) {
    block_size_ = n;
    return *this;
  }

  TransactionRecord& add(const std::string& activity, TxStatus status = TxStatus::kSuccess) {
    TransactionRecord tx;
    tx.client_timestamp_ms = next_ts_;
    next_ts_ += ts_step_;
    tx.activity_name = activity;
    tx.invoker_client = "Org1.client0";
    tx.invoker_org = "Org1";
    tx.endorsers = {"Org1.peer0"};
    tx.status = status;
    tx.commit_order = log_.transactions.size();
    log_.transactions.push_back(std::move(tx));
    return log_.transactions.back();
  }

  LogBuilder& ts_step(std::int64_t ms) {
    ts_step_ = ms;
    return *this;
  }

  LogBuilder& at(std::int64_t ms) {
    next_ts_ = ms;
    return *this;
  }

  LogBuilder& config(int block_count, double timeout_s, const std::string& policy) {
    log_.config = NetworkConfig{block_count, timeout_s, policy};
    return *this;
  }

  // Finalizes tx_type derivation and the block table.
  BlockchainLog build() {
    BlockchainLog out = log_;
    for (auto& tx : out.transactions) {
      if (tx.read_set.empty() && tx.write_set.empty() && tx.range_reads.empty())
        tx.read_set.push_back({"pad_" + std::to_string(tx.commit_order), 0});
      tx.tx_type = [&] {
        if (!tx.range_reads.empty()) return TxType::kRangeRead;
        for (const auto& w : tx.write_set)
          if (w.value == kTombstoneValue) return TxType::kDelete;
        if (!tx.write_set.empty() && !tx.read_set.empty()) return TxType::kUpdate;
        if (!tx.write_set.empty()) return TxType::kWrite;
        return TxType::kRead;
      }();
    }
    std::size_t i = 0;
    while (i < out.transactions.size()) {
      Block b;
      b.block_number = out.blocks.size();
      for (std::size_t j = 0; j < block_size_ && i < out.transactions.size(); ++j, ++i) {
        out.transactions[i].block_number = b.block_number;
        b.tx_commit_orders.push_back(out.transactions[i].commit_order);
      }
      out.blocks.push_back(std::move(b));
    }
    return out;
  }

 private:
  BlockchainLog log_;
  std::size_t block_size_ = 1000000;
  std::int64_t next_ts_ = 0;
  std::int64_t ts_step_ = 10;
};

inline TransactionRecord& with_read(TransactionRecord& tx, const std::string& key,
                                    std::uint64_t version) {
  tx.read_set.push_back({key, version});
  return tx;
}

inline TransactionRecord& with_write(TransactionRecord& tx, const std::string& key,
                                     const std::string& value) {
  tx.write_set.push_back({key, value});
  return tx;
}

}  // namespace ledgerlens::testing
