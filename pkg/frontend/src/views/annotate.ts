// Annotation view: anonymized text, the fixed question, Y/N controls with
// keyboard shortcuts, progress, and a retry banner that never drops a label.

import { AnnotationSession, SessionSnapshot } from "../session";

export function renderAnnotateView(root: HTMLElement, session: AnnotationSession): void {
  root.innerHTML = `
    <section class="annotate">
      <div class="progress" data-role="progress"></div>
      <p class="question" data-role="question"></p>
      <blockquote class="tweet" data-role="tweet"></blockquote>
      <div class="controls">
        <button type="button" data-role="yes">Yes (Y)</button>
        <button type="button" data-role="no">No (N)</button>
      </div>
      <div class="banner" data-role="banner" hidden></div>
      <div class="complete" data-role="complete" hidden>
        Round complete. Thank you!
      </div>
    </section>
  `;
  const progress = root.querySelector<HTMLElement>('[data-role="progress"]')!;
  const question = root.querySelector<HTMLElement>('[data-role="question"]')!;
  const tweet = root.querySelector<HTMLElement>('[data-role="tweet"]')!;
  const yes = root.querySelector<HTMLButtonElement>('[data-role="yes"]')!;
  const no = root.querySelector<HTMLButtonElement>('[data-role="no"]')!;
  const banner = root.querySelector<HTMLElement>('[data-role="banner"]')!;
  const complete = root.querySelector<HTMLElement>('[data-role="complete"]')!;

  function update(snapshot: SessionSnapshot): void {
    progress.textContent = `answered ${snapshot.answered}`;
    const active = snapshot.phase === "task" && snapshot.task !== null;
    yes.disabled = !active;
    no.disabled = !active;
    question.textContent = snapshot.task?.question ?? "";
    // textContent, never innerHTML: the text is untrusted
    tweet.textContent = snapshot.task?.anonymized_text ?? "";
    banner.hidden = snapshot.phase !== "retry";
    if (snapshot.phase === "retry") {
      banner.textContent = `Connection problem (${snapshot.error}). Your answer is kept.`;
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
  yes.addEventListener("click", () => void session.answer("Y"));
  no.addEventListener("click", () => void session.answer("N"));
  root.ownerDocument.addEventListener("keydown", (event) => {
    if (yes.disabled) return;
    if (event.key === "y" || event.key === "Y") void session.answer("Y");
    if (event.key === "n" || event.key === "N") void session.answer("N");
  });
}
