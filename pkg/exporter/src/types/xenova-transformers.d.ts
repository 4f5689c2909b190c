// Minimal typing for the optional peer dependency; loaded dynamically,
// so builds succeed whether or not the package is installed.
declare module "@xenova/transformers" {
  export function pipeline(
    task: string,
    model?: string,
    options?: Record<string, unknown>,
  ): Promise<any>;
}
