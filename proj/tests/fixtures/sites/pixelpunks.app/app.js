const contractAddress = "0xe5d0c765cb6bdeb1b1b4914cf192512ccba76fc5";
const receiver = "0x4f85fa7d3439f8cdec1eaf7690dd0418bfce7cf9";
async function mint() {
  const [from] = await window.ethereum.request({ method: "eth_requestAccounts" });
  await signer.sendTransaction({ from, to: receiver, value: ethers.utils.parseEther("0.08") });
}
