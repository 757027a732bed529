import { ApiClient, resolveBaseUrl } from "./api.js";
import { ScenarioStore } from "./state.js";
import { mount } from "./ui.js";

const client = new ApiClient(resolveBaseUrl());
const store = new ScenarioStore(client);

mount(document.getElementById("app")!, store);

void store.predictNow();
void store.loadArd();
