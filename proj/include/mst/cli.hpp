#pragma once

#include <iostream>
#include <string>
#include <vector>

#include "mst/domain.hpp"

// Command-line front end: check, run, prove, obligations, trace-replay.
// Exit codes: 0 accept/success, 1 reject (typecheck or harness violation),
// 2 usage or parse error, 3 resource limit (fuel or prover budget).

namespace mst::cli {

constexpr int kOk = 0;
constexpr int kReject = 1;
constexpr int kUsage = 2;
constexpr int kResourceLimit = 3;

// Registry with the built-in domains plus the ok/tmp demonstration domain
// used by the preorder-escape corpus program.
DomainRegistry corpus_registry();

// Ok/Tmp lifting of a small counter: state is either Ok(n) or
// Tmp(snapshot, actual); the lifted preorder compares snapshots only, so
// the actual value may move freely inside Tmp.
StateDomain make_oktmp_domain(std::size_t n = 4);

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace mst::cli
