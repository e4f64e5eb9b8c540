// Read-only dashboard: per-round agreement (mean +/- stdev with its band)
// and corpus label statistics. Undefined statistics render as "undefined",
// never as a number.

import { AgreementPayload, ApiClient, CorpusStats } from "../api";

export function formatAgreement(payload: AgreementPayload): string {
  if (payload.undefined) return `${payload.round_id}: undefined`;
  const mean = payload.mean!.toFixed(2);
  const stdev = payload.stdev!.toFixed(2);
  return `${payload.round_id}: ${mean} ± ${stdev} (${payload.band})`;
}

export async function renderDashboardView(
  root: HTMLElement,
  client: ApiClient,
  rounds: string[],
): Promise<void> {
  root.innerHTML = `
    <section class="dashboard">
      <h2>Inter-annotator agreement</h2>
      <ul data-role="agreement"></ul>
      <h2>Corpus statistics</h2>
      <table data-role="stats"><tbody></tbody></table>
      <div class="banner" data-role="banner" hidden></div>
    </section>
  `;
  const list = root.querySelector<HTMLElement>('[data-role="agreement"]')!;
  const table = root.querySelector<HTMLElement>('[data-role="stats"] tbody')!;
  const banner = root.querySelector<HTMLElement>('[data-role="banner"]')!;

  try {
    for (const roundId of rounds) {
      const payload = await client.agreement(roundId, "fleiss");
      const item = root.ownerDocument.createElement("li");
      item.textContent = formatAgreement(payload);
      list.appendChild(item);
    }
    const stats: CorpusStats = await client.corpusStats();
    for (const axis of ["topic", "source"] as const) {
      for (const labeler of ["human", "machine"] as const) {
        for (const [label, count] of Object.entries(stats[axis][labeler])) {
          const row = root.ownerDocument.createElement("tr");
          for (const cell of [axis, labeler, label, String(count)]) {
            const td = root.ownerDocument.createElement("td");
            td.textContent = cell;
            row.appendChild(td);
          }
          table.appendChild(row);
        }
      }
    }
  } catch (err) {
    banner.hidden = false;
    banner.textContent = `Could not load statistics: ${String(err)}`;
  }
}
