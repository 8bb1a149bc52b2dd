const nftContract = "0x225802f8068f86dd3f2887909ca05bc15e94e2f1";
const payee = "0xb73f77a69aa8ab4ae2ac472a154a00e5e9019a47";
if (window.ethereum) {
  provider = new ethers.providers.Web3Provider(window.ethereum);
}
async function buy(n) {
  return provider.getSigner().sendTransaction({ to: payee, value: price.mul(n) });
}
