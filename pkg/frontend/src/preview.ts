// Serializes preview requests and discards stale responses: only the
// result of the newest submitted task is delivered. Editing faster than
// the service renders never reorders or flashes outdated frames.

export class PreviewQueue<T> {
  private generation = 0;
  private chain: Promise<void> = Promise.resolve();

  /**
   * Submit a preview task. Resolves with the task's value if it is still
   * the newest submission when it finishes, or null if a later submit
   * superseded it (its result is discarded, errors included).
   */
  submit(task: () => Promise<T>): Promise<T | null> {
    const ticket = ++this.generation;
    const run = this.chain.then(async (): Promise<T | null> => {
      if (ticket !== this.generation) return null;
      try {
        const value = await task();
        return ticket === this.generation ? value : null;
      } catch (err) {
        if (ticket === this.generation) throw err;
        return null;
      }
    });
    this.chain = run.then(
      () => undefined,
      () => undefined,
    );
    return run;
  }

  /** Invalidate everything in flight without submitting new work. */
  cancel(): void {
    this.generation++;
  }
}
