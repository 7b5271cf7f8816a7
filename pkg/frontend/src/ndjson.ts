/** Reassembles newline-delimited JSON lines from arbitrary chunk splits. */
export class LineSplitter {
  private buf = "";

  /** Feed one chunk; returns every complete line it finished. */
  push(chunk: string): string[] {
    this.buf += chunk;
    const parts = this.buf.split("\n");
    this.buf = parts.pop() ?? "";
    return parts.filter((line) => line.length > 0);
  }

  /** Drain a trailing unterminated line at end of stream. */
  flush(): string[] {
    const last = this.buf;
    this.buf = "";
    return last.length > 0 ? [last] : [];
  }
}
