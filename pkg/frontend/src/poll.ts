/**
 * Run-status polling. One-second interval; resolves when the run leaves the
 * queue (done or failed). Push delivery is a non-goal at desk scale.
 */

import type { RunRecord } from './api.js';

export const POLL_INTERVAL_MS = 1000;

export type FetchRun = (runId: string) => Promise<RunRecord>;

const sleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export async function pollRun(
  fetchRun: FetchRun,
  runId: string,
  intervalMs: number = POLL_INTERVAL_MS,
  maxPolls: number = 600,
): Promise<RunRecord> {
  for (let i = 0; i < maxPolls; i++) {
    const rec = await fetchRun(runId);
    if (rec.status === 'done' || rec.status === 'failed') {
      return rec;
    }
    await sleep(intervalMs);
  }
  throw new Error(`run ${runId} still pending after ${maxPolls} polls`);
}
