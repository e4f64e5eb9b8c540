// Expert review view: shows the disputed tweet with the crowd's vote split
// and records a final job/notjob decision.

import { AdjudicationSession, SessionSnapshot } from "../session";

export function renderAdjudicateView(root: HTMLElement, session: AdjudicationSession): void {
  root.innerHTML = `
    <section class="adjudicate">
      <div class="progress" data-role="progress"></div>
      <blockquote class="tweet" data-role="tweet"></blockquote>
      <div class="votes" data-role="votes"></div>
      <div class="controls">
        <button type="button" data-role="job">job</button>
        <button type="button" data-role="notjob">not job</button>
      </div>
      <div class="banner" data-role="banner" hidden></div>
      <div class="complete" data-role="complete" hidden>Queue empty.</div>
    </section>
  `;
  const progress = root.querySelector<HTMLElement>('[data-role="progress"]')!;
  const tweet = root.querySelector<HTMLElement>('[data-role="tweet"]')!;
  const votes = root.querySelector<HTMLElement>('[data-role="votes"]')!;
  const job = root.querySelector<HTMLButtonElement>('[data-role="job"]')!;
  const notjob = root.querySelector<HTMLButtonElement>('[data-role="notjob"]')!;
  const banner = root.querySelector<HTMLElement>('[data-role="banner"]')!;
  const complete = root.querySelector<HTMLElement>('[data-role="complete"]')!;

  function update(snapshot: SessionSnapshot): void {
    progress.textContent = `reviewed ${snapshot.answered}`;
    const active = snapshot.phase === "task" && snapshot.task !== null;
    job.disabled = !active;
    notjob.disabled = !active;
    tweet.textContent = snapshot.task?.anonymized_text ?? "";
    const context = snapshot.task?.context;
    votes.textContent = context ? `${context.y} job / ${context.n} not` : "";
    banner.hidden = snapshot.phase !== "retry";
    if (snapshot.phase === "retry") {
      banner.textContent = `Connection problem (${snapshot.error}).`;
      const retryButton = document.createElement("button");
      retryButton.type = "button";
      retryButton.dataset.role = "retry";
      retryButton.textContent = "Retry";
      retryButton.addEventListener("click", () => void session.retry());
      banner.append(" ");
      banner.appendChild(retryButton);
    }
    complete.hidden = snapshot.phase !== "complete";
  }

  session.subscribe(update);
  job.addEventListener("click", () => void session.answer("job"));
  notjob.addEventListener("click", () => void session.answer("notjob"));
}
