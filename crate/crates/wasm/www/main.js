import init, { analyze, foliate_svg, gallery_list } from "./pkg/involution_wasm.js";

const $ = (id) => document.getElementById(id);

function fail(err) {
  $("verdict").textContent = String(err);
  $("verdict").className = "error";
}

function runAnalyze() {
  try {
    const report = JSON.parse(analyze($("map").value, $("window").value, 201));
    $("verdict").className = "";
    $("verdict").textContent =
      `${report.theorem_verdict} | injectivity: ${report.injectivity.status}`;
    $("report").textContent = JSON.stringify(report, null, 2);
  } catch (err) {
    fail(err);
  }
}

function runFoliate() {
  try {
    $("portrait").innerHTML = foliate_svg($("map").value, $("window").value, Number($("leaves").value));
  } catch (err) {
    fail(err);
  }
}

await init();
const select = $("gallery");
for (const e of JSON.parse(gallery_list())) {
  const opt = document.createElement("option");
  opt.value = `gallery:${e.name}`;
  opt.textContent = `${e.name}: ${e.formula} (${e.expected})`;
  select.append(opt);
}
select.addEventListener("change", () => {
  $("map").value = select.value;
  $("window").value = "";
  runAnalyze();
  runFoliate();
});
$("analyze").addEventListener("click", runAnalyze);
$("foliate").addEventListener("click", runFoliate);
runAnalyze();
runFoliate();
