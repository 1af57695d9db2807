// Spawns the real analysis service for integration tests.

import { spawn, execFileSync, type ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export interface ServiceHandle {
  base: string;
  stop: () => void;
}

export async function startService(port = 8791): Promise<ServiceHandle> {
  const dir = mkdtempSync(join(tmpdir(), "komigo-ui-"));
  const netPath = join(dir, "net.txt");
  execFileSync("python3", [
    "-c",
    [
      "from komigo.network import Network, NetworkConfig, save_weights",
      `save_weights(${JSON.stringify(netPath)}, Network(NetworkConfig(blocks=1, filters=8), seed=11))`,
    ].join("\n"),
  ]);

  const proc: ChildProcess = spawn(
    "python3",
    ["-m", "komigo.cli", "serve", "--net", netPath, "--port", String(port), "--host", "127.0.0.1"],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  let stderr = "";
  proc.stderr?.on("data", (chunk) => (stderr += chunk));

  const base = `http://127.0.0.1:${port}`;
  const deadline = Date.now() + 30_000;
  for (;;) {
    try {
      const response = await fetch(`${base}/nets`);
      if (response.ok) break;
    } catch {
      /* not up yet */
    }
    if (Date.now() > deadline) {
      proc.kill();
      throw new Error(`service did not come up: ${stderr}`);
    }
    await new Promise((r) => setTimeout(r, 250));
  }
  return {
    base,
    stop: () => {
      proc.kill("SIGTERM");
    },
  };
}
