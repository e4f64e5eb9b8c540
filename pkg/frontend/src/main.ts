// Bootstrap: read connection settings from the query string, build the
// client, and mount the requested view.
//
//   /?token=...&round=R1            annotation (default mode)
//   /?token=...&mode=adjudicate     expert review
//   /?token=...&mode=dashboard&rounds=R1,R2,R4

import { ApiClient } from "./api";
import { AdjudicationSession, AnnotationSession } from "./session";
import { renderAdjudicateView } from "./views/adjudicate";
import { renderAnnotateView } from "./views/annotate";
import { renderDashboardView } from "./views/dashboard";
import "./styles.css";

export function mount(root: HTMLElement, location: Location): void {
  const params = new URLSearchParams(location.search);
  const token = params.get("token") ?? "";
  const baseUrl = params.get("api") ?? "";
  const mode = params.get("mode") ?? "annotate";
  if (!token) {
    root.innerHTML = `<p class="error">Add ?token=YOUR_TOKEN to the URL.</p>`;
    return;
  }
  const client = new ApiClient(baseUrl, token);
  if (mode === "dashboard") {
    const rounds = (params.get("rounds") ?? "R1").split(",").filter(Boolean);
    void renderDashboardView(root, client, rounds);
  } else if (mode === "adjudicate") {
    const session = new AdjudicationSession(client);
    renderAdjudicateView(root, session);
    void session.start();
  } else {
    const session = new AnnotationSession(client, params.get("round") ?? "R1");
    renderAnnotateView(root, session);
    void session.start();
  }
}

const root = document.getElementById("app");
if (root) {
  mount(root, window.location);
}
