import { StudioApp } from "./app";

const app = new StudioApp();
app.boot();

declare global {
  interface Window {
    studio: StudioApp;
  }
}
window.studio = app;
