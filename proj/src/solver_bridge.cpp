#include "bridge_internal.hpp"

#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <sstream>
#include <stdexcept>
#include <sys/wait.h>
#include <unistd.h>

namespace qkd::detail {

namespace {

// Backend worker: reads one JSON header line plus packed arrays per request,
// solves the cone LP, replies with a JSON header line plus packed arrays.
const char* kWorkerScript = R"PY(
import json, sys
import numpy as np
from cvxopt import matrix, spmatrix, solvers

inp = sys.stdin.buffer
out = sys.stdout.buffer

solvers.options['show_progress'] = False
solvers.options['maxiters'] = 200

# Tolerance ladder: start tight, back off if the interior-point method stalls
# or crashes near the boundary.  Accuracy is re-validated downstream from the
# returned dual variables, so looser runs never weaken the certified output.
TOLS = (1e-8, 1e-6)

def read_exact(n):
    buf = b''
    while len(buf) < n:
        chunk = inp.read(n - len(buf))
        if not chunk:
            raise EOFError
        buf += chunk
    return buf

while True:
    line = inp.readline()
    if not line:
        break
    hdr = json.loads(line)
    n, m, nnz = hdr['n'], hdr['m'], hdr['nnz']
    c = np.frombuffer(read_exact(8 * n), dtype=np.float64)
    h = np.frombuffer(read_exact(8 * m), dtype=np.float64)
    rows = np.frombuffer(read_exact(4 * nnz), dtype=np.int32)
    cols = np.frombuffer(read_exact(4 * nnz), dtype=np.int32)
    vals = np.frombuffer(read_exact(8 * nnz), dtype=np.float64)
    status = 'error'
    x = np.zeros(n)
    z = np.zeros(m)
    for tol in TOLS:
        solvers.options['abstol'] = tol
        solvers.options['reltol'] = tol
        solvers.options['feastol'] = tol
        try:
            G = spmatrix(matrix(vals), rows.tolist(), cols.tolist(), (m, n))
            dims = {'l': hdr['l'], 'q': [], 's': hdr['s']}
            sol = solvers.conelp(matrix(c), G, matrix(h), dims)
            status = sol['status']
            if sol.get('x') is not None:
                x = np.array(sol['x']).ravel()
            if sol.get('z') is not None:
                z = np.array(sol['z']).ravel()
        except Exception as e:  # noqa: BLE001 - report and keep serving
            status = 'error: ' + repr(e)
        if status in ('optimal', 'primal infeasible', 'dual infeasible'):
            break
    out.write((json.dumps({'status': status}) + '\n').encode())
    out.write(np.ascontiguousarray(x, dtype=np.float64).tobytes())
    out.write(np.ascontiguousarray(z, dtype=np.float64).tobytes())
    out.flush()
)PY";

void write_all(FILE* f, const void* data, size_t n) {
  if (n && std::fwrite(data, 1, n, f) != n)
    throw std::runtime_error("solver bridge: write failed");
}

void read_all(FILE* f, void* data, size_t n) {
  if (n && std::fread(data, 1, n, f) != n)
    throw std::runtime_error("solver bridge: backend closed the pipe");
}

}  // namespace

BridgeProcess::BridgeProcess() {
  char tmpl[] = "/tmp/qkd_solver_XXXXXX.py";
  int fd = mkstemps(tmpl, 3);
  if (fd < 0) throw std::runtime_error("solver bridge: mkstemps failed");
  script_path_ = tmpl;
  {
    FILE* f = fdopen(fd, "w");
    std::fputs(kWorkerScript, f);
    std::fclose(f);
  }
  int to_pipe[2], from_pipe[2];
  if (pipe(to_pipe) || pipe(from_pipe))
    throw std::runtime_error("solver bridge: pipe failed");
  pid_ = fork();
  if (pid_ < 0) throw std::runtime_error("solver bridge: fork failed");
  if (pid_ == 0) {
    dup2(to_pipe[0], 0);
    dup2(from_pipe[1], 1);
    close(to_pipe[0]);
    close(to_pipe[1]);
    close(from_pipe[0]);
    close(from_pipe[1]);
    execlp("python3", "python3", script_path_.c_str(), (char*)nullptr);
    _exit(127);
  }
  close(to_pipe[0]);
  close(from_pipe[1]);
  to_child_ = fdopen(to_pipe[1], "w");
  from_child_ = fdopen(from_pipe[0], "r");
}

BridgeProcess::~BridgeProcess() {
  if (to_child_) std::fclose(to_child_);  // EOF ends the worker loop
  if (from_child_) std::fclose(from_child_);
  if (pid_ > 0) waitpid(pid_, nullptr, 0);
  if (!script_path_.empty()) unlink(script_path_.c_str());
}

ConeLpResponse BridgeProcess::call(const ConeLpRequest& req) {
  const int n = static_cast<int>(req.c.size());
  const int m = static_cast<int>(req.h.size());
  const int nnz = static_cast<int>(req.g_vals.size());
  std::ostringstream hdr;
  hdr << "{\"n\":" << n << ",\"m\":" << m << ",\"nnz\":" << nnz
      << ",\"l\":" << req.n_lin << ",\"s\":[";
  for (size_t i = 0; i < req.psd_dims.size(); ++i)
    hdr << (i ? "," : "") << req.psd_dims[i];
  hdr << "]}\n";
  std::string h = hdr.str();
  write_all(to_child_, h.data(), h.size());
  write_all(to_child_, req.c.data(), size_t(8) * n);
  write_all(to_child_, req.h.data(), size_t(8) * m);
  std::vector<int32_t> rows(req.g_rows.begin(), req.g_rows.end());
  std::vector<int32_t> cols(req.g_cols.begin(), req.g_cols.end());
  write_all(to_child_, rows.data(), size_t(4) * nnz);
  write_all(to_child_, cols.data(), size_t(4) * nnz);
  write_all(to_child_, req.g_vals.data(), size_t(8) * nnz);
  std::fflush(to_child_);

  std::string line;
  for (int ch; (ch = std::fgetc(from_child_)) != '\n';) {
    if (ch == EOF)
      throw std::runtime_error("solver bridge: backend died");
    line.push_back(static_cast<char>(ch));
  }
  ConeLpResponse resp;
  auto pos = line.find("\"status\"");
  pos = line.find(':', pos);
  auto q1 = line.find('"', pos);
  auto q2 = line.find('"', q1 + 1);
  resp.status = line.substr(q1 + 1, q2 - q1 - 1);
  resp.x.resize(n);
  resp.z.resize(m);
  read_all(from_child_, resp.x.data(), size_t(8) * n);
  read_all(from_child_, resp.z.data(), size_t(8) * m);
  return resp;
}

}  // namespace qkd::detail
