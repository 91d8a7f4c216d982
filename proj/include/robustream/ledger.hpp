// Copyright 2026 The robustream Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>

namespace robustream {

// Counts floats held by estimator state. Filter history and working scratch
// are tracked separately so a test can check that scratch does not depend
// on the sample budget.
enum class MemTag { kHistory = 0, kScratch = 1 };

class MemoryLedger {
 public:
  void add(MemTag tag, std::size_t n);
  void sub(MemTag tag, std::size_t n);

  std::size_t current() const { return cur_[0] + cur_[1]; }
  std::size_t current(MemTag tag) const { return cur_[idx(tag)]; }
  std::size_t peak() const { return peak_total_; }
  std::size_t peak(MemTag tag) const { return peak_[idx(tag)]; }
  void reset();

 private:
  static int idx(MemTag t) { return t == MemTag::kHistory ? 0 : 1; }
  std::size_t cur_[2] = {0, 0};
  std::size_t peak_[2] = {0, 0};
  std::size_t peak_total_ = 0;
};

// Installs a ledger for the current thread; tokens created while it is
// active charge it.
class LedgerScope {
 public:
  explicit LedgerScope(MemoryLedger* ledger);
  ~LedgerScope();
  LedgerScope(const LedgerScope&) = delete;
  LedgerScope& operator=(const LedgerScope&) = delete;

 private:
  MemoryLedger* prev_;
};

MemoryLedger* active_ledger();

// RAII charge of n floats against the ledger that was active when the token
// was created. Copies charge the ledger active at copy time.
class MemToken {
 public:
  MemToken() = default;
  MemToken(MemTag tag, std::size_t n);
  MemToken(const MemToken& o);
  MemToken(MemToken&& o) noexcept;
  MemToken& operator=(const MemToken& o);
  MemToken& operator=(MemToken&& o) noexcept;
  ~MemToken();

  void resize(std::size_t n);
  std::size_t size() const { return n_; }

 private:
  void release();
  MemTag tag_ = MemTag::kScratch;
  std::size_t n_ = 0;
  MemoryLedger* ledger_ = nullptr;
};

}  // namespace robustream
