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

#include "robustream/ledger.hpp"

#include <algorithm>

namespace robustream {

namespace {
thread_local MemoryLedger* g_active = nullptr;
}

void MemoryLedger::add(MemTag tag, std::size_t n) {
  int i = idx(tag);
  cur_[i] += n;
  peak_[i] = std::max(peak_[i], cur_[i]);
  peak_total_ = std::max(peak_total_, cur_[0] + cur_[1]);
}

void MemoryLedger::sub(MemTag tag, std::size_t n) {
  int i = idx(tag);
  cur_[i] -= std::min(cur_[i], n);
}

void MemoryLedger::reset() { *this = MemoryLedger(); }

LedgerScope::LedgerScope(MemoryLedger* ledger) : prev_(g_active) {
  g_active = ledger;
}

LedgerScope::~LedgerScope() { g_active = prev_; }

MemoryLedger* active_ledger() { return g_active; }

MemToken::MemToken(MemTag tag, std::size_t n)
    : tag_(tag), n_(n), ledger_(g_active) {
  if (ledger_) ledger_->add(tag_, n_);
}

MemToken::MemToken(const MemToken& o) : tag_(o.tag_), n_(o.n_), ledger_(g_active) {
  if (ledger_) ledger_->add(tag_, n_);
}

MemToken::MemToken(MemToken&& o) noexcept
    : tag_(o.tag_), n_(o.n_), ledger_(o.ledger_) {
  o.n_ = 0;
  o.ledger_ = nullptr;
}

MemToken& MemToken::operator=(const MemToken& o) {
  if (this == &o) return *this;
  release();
  tag_ = o.tag_;
  n_ = o.n_;
  ledger_ = g_active;
  if (ledger_) ledger_->add(tag_, n_);
  return *this;
}

MemToken& MemToken::operator=(MemToken&& o) noexcept {
  if (this == &o) return *this;
  release();
  tag_ = o.tag_;
  n_ = o.n_;
  ledger_ = o.ledger_;
  o.n_ = 0;
  o.ledger_ = nullptr;
  return *this;
}

MemToken::~MemToken() { release(); }

void MemToken::release() {
  if (ledger_) ledger_->sub(tag_, n_);
  n_ = 0;
  ledger_ = nullptr;
}

void MemToken::resize(std::size_t n) {
  if (!ledger_) ledger_ = g_active;
  if (ledger_) {
    if (n > n_) ledger_->add(tag_, n - n_);
    else ledger_->sub(tag_, n_ - n);
  }
  n_ = n;
}

}  // namespace robustream
