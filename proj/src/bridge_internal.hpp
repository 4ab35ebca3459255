#pragma once

#include "qkd/optim.hpp"

#include <cstdio>
#include <string>
#include <sys/types.h>

namespace qkd::detail {

// One backend OS process with line/binary framed request-response pipes.
class BridgeProcess {
 public:
  BridgeProcess();
  ~BridgeProcess();
  BridgeProcess(const BridgeProcess&) = delete;
  BridgeProcess& operator=(const BridgeProcess&) = delete;

  ConeLpResponse call(const ConeLpRequest& req);

 private:
  pid_t pid_ = -1;
  FILE* to_child_ = nullptr;
  FILE* from_child_ = nullptr;
  std::string script_path_;
};

}  // namespace qkd::detail
